#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace hlent {

enum class Bc { Periodic, Fixed };
enum class Sampling { IntegerK, HalfShiftK };

std::string to_string(Bc bc);
std::string to_string(Sampling s);

// A site on the lattice. Only the first `dims` coordinates of the owning
// spec are meaningful; unused entries stay zero so lexicographic comparison
// works uniformly.
struct Site {
  std::array<int, 3> x{0, 0, 0};

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;
};

// A normal-mode label. Half-integer values appear under HalfShiftK sampling.
struct Mode {
  std::array<double, 3> k{0.0, 0.0, 0.0};
};

/// Harmonic lattice of coupled oscillators: geometry, boundary condition,
/// oscillator mass (IR cutoff) and momentum sampling mode.
///
/// Size convention: `sizes[a] = L_a` counts normal modes per axis. Under
/// periodic bc the sites are j_a = 0..L_a-1 (L_a of them). Under fixed-end
/// bc the boundary sites carry no variables, so the dynamical sites are
/// j_a = 1..L_a-1 (L_a-1 of them); a chain described as "N+2 sites with
/// fixed ends" therefore has L = N+1. Getting this off by one corrupts
/// every correlator downstream.
struct LatticeSpec {
  int dims = 1;
  std::array<int, 3> sizes{2, 0, 0};
  Bc bc = Bc::Periodic;
  double omega = 0.0;
  Sampling sampling = Sampling::IntegerK;

  int site_lo(int axis) const { return bc == Bc::Fixed ? 1 : 0; }
  int site_hi(int axis) const { return sizes[axis] - 1; }
  int sites_per_axis(int axis) const { return site_hi(axis) - site_lo(axis) + 1; }
  long total_sites() const;
  long mode_count() const;

  bool site_valid(const Site& s) const;

  // Throws DomainError when the field combination is inconsistent
  // (HalfShiftK with fixed ends, zero-mass periodic IntegerK, bad sizes).
  void validate() const;

  // Canonical text form; used for cache keys and manifests.
  std::string key() const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

// Conventional default mass: fixed-end and half-shifted periodic lattices are
// IR-finite at omega = 0; integer-sampled periodic lattices need a regulator.
double default_omega(Bc bc, Sampling sampling);

// Mode values along one axis for the spec's bc/sampling.
std::vector<double> axis_modes(const LatticeSpec& spec, int axis);

// Dispersion: sqrt(omega^2 + 4 sum_a sin^2(pi k_a / L_a)) for periodic bc,
// sqrt(omega^2 + 4 sum_a sin^2(pi k_a / (2 L_a))) for fixed ends.
double mode_frequency(const LatticeSpec& spec, const Mode& k);

// All dynamical sites in lexicographic order.
std::vector<Site> all_dynamical_sites(const LatticeSpec& spec);

// Lexicographic rank of a site among the dynamical sites.
long site_rank(const LatticeSpec& spec, const Site& s);

/// Dense coupling matrix K over the dynamical sites (lexicographic order):
/// diagonal 2*dims + omega^2, -1 per nearest-neighbor bond, periodic bc
/// wrapping across opposite faces. Eigenvalues are the squared mode
/// frequencies of the IntegerK modes. Intended for oracle-scale systems;
/// throws CapacityError above `max_sites`.
Eigen::MatrixXd build_coupling_matrix(const LatticeSpec& spec, long max_sites = 10000);

}  // namespace hlent
