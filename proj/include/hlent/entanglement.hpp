#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "hlent/correlators.hpp"

namespace hlent {

/// Bipartition of a correlator window's site list.
struct Partition {
  std::vector<Site> a1;
  std::vector<Site> a2;
};

/// Eigenvalues xi of sqrt(X P) (or sqrt(X P^{T2}) when `transposed`),
/// ascending. Untransposed spectra of valid ground states satisfy
/// xi >= 1/2. `clamped` counts eigenvalues lifted to the numerical floor.
struct SymplecticSpectrum {
  Eigen::VectorXd values;
  bool transposed = false;
  int clamped = 0;
};

enum class MeasureKind { Entropy, Renyi, LogNegativity, MutualInfo };

std::string to_string(MeasureKind k);

struct MeasureValue {
  MeasureKind kind = MeasureKind::Entropy;
  double order = 1.0;  // Renyi order (MutualInfo/Renyi)
  double value = 0.0;
  int clamped = 0;       // clamped eigenvalues across the spectra involved
  long subsystem_sites = 0;
};

// Numerical floors: spectra eigenvalues are clamped at kClampFloor, and
// entropy/Renyi terms with xi within kDegenerateEps of 1/2 contribute zero.
inline constexpr double kClampFloor = 1e-12;
inline constexpr double kDegenerateEps = 1e-12;

/// Spectrum of the window's subsystem. When `transpose` is given, the
/// momentum correlations between its two blocks are sign-flipped first
/// (time reversal of one block); `transpose` must partition the window.
SymplecticSpectrum symplectic_spectrum(const CorrelatorWindow& corr,
                                       const std::optional<Partition>& transpose = std::nullopt);

/// S = sum (xi+1/2)log(xi+1/2) - (xi-1/2)log(xi-1/2).
MeasureValue entanglement_entropy(const SymplecticSpectrum& spectrum);

/// S^(n) = 1/(n-1) sum log[(xi+1/2)^n - (xi-1/2)^n], n > 0, n != 1.
/// Reduces to the entanglement entropy as n -> 1 and is nonnegative for
/// valid spectra on both sides of n = 1.
MeasureValue renyi_entropy(const SymplecticSpectrum& spectrum, double order);

/// E = sum log max(1, 1/(2 xi')) over the partially transposed spectrum.
MeasureValue log_negativity(const CorrelatorWindow& corr, const Partition& part);

/// I^(n) = S^(n)_{A1} + S^(n)_{A2} - S^(n)_A; order 1 uses the entropy.
MeasureValue mutual_information(const CorrelatorWindow& corrA, const CorrelatorWindow& corrA1,
                                const CorrelatorWindow& corrA2, double order);

/// Same, slicing the A1/A2 windows out of corrA's matrices.
MeasureValue mutual_information(const CorrelatorWindow& corrA, const Partition& part, double order);

}  // namespace hlent
