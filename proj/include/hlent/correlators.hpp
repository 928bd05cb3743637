#pragma once

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hlent/lattice.hpp"

namespace hlent {

// Axis-aligned box of sites, [lo, lo+extent).
struct Box {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> extent{1, 1, 1};

  bool contains(const Site& s, int dims) const;
  long volume(int dims) const;
  std::string key(int dims) const;

  friend bool operator==(const Box&, const Box&) = default;
};

Box bounding_box(std::span<const Site> sites, int dims);

/// An ordered (lexicographic) list of distinct sites on one lattice.
struct Window {
  LatticeSpec spec;
  std::vector<Site> sites;

  void validate() const;  // DomainError on duplicate/misordered/invalid sites
};

enum class Provenance { ModeSum, MatrixFunction };

/// Ground-state correlators restricted to a window: X = <q_r q_s>,
/// P = <p_r p_s>, both symmetric, indexed like window.sites.
struct CorrelatorWindow {
  Window window;
  Eigen::MatrixXd X;
  Eigen::MatrixXd P;
  Provenance provenance = Provenance::ModeSum;
};

struct CorrelatorOptions {
  // Evaluate fixed-end windows by staged sine-transform contractions instead
  // of the per-entry mode sum. Identical up to rounding, asymptotically much
  // cheaper; validated against the direct sum in tests.
  bool fbc_fast = false;
  int workers = 1;
};

// ---------------------------------------------------------------------------
// Production evaluators, reusable across many regions in one D window.

/// Periodic lattices only: X and P depend on the coordinate difference alone,
/// so a window of extent w per axis needs just one table of w^d values per
/// matrix (the formulas are even in each difference component).
struct PbcDifferenceTable {
  LatticeSpec spec;
  std::array<int, 3> extent{1, 1, 1};
  std::vector<double> x;  // row-major over |d|
  std::vector<double> p;

  double x_at(const Site& r, const Site& s) const;
  double p_at(const Site& r, const Site& s) const;
};

PbcDifferenceTable build_pbc_difference_table(const LatticeSpec& spec, std::array<int, 3> extent,
                                              int workers = 1);

/// Fixed-end lattices: dense X,P over every site of a box.
struct FbcBoxMatrices {
  LatticeSpec spec;
  Box box;
  Eigen::MatrixXd X;
  Eigen::MatrixXd P;

  long index_of(const Site& s) const;
};

FbcBoxMatrices build_fbc_box(const LatticeSpec& spec, const Box& box, bool fast, int workers = 1);

/// Shared correlator source for one (spec, D box): a difference table under
/// periodic bc, box matrices under fixed ends. gather() slices out the
/// (X, P) pair of an arbitrary site list inside the box.
class CorrelatorProvider {
 public:
  static CorrelatorProvider compute(const LatticeSpec& spec, const Box& box,
                                    const CorrelatorOptions& opt);
  static CorrelatorProvider from_table(PbcDifferenceTable table, Box box);
  static CorrelatorProvider from_box(FbcBoxMatrices mats);

  CorrelatorWindow gather(std::span<const Site> sites) const;
  const LatticeSpec& spec() const { return spec_; }
  const Box& box() const { return box_; }
  std::string cache_key() const;
  bool is_table() const { return table_ != nullptr; }
  const PbcDifferenceTable& table() const { return *table_; }
  const FbcBoxMatrices& box_matrices() const { return *mats_; }

 private:
  LatticeSpec spec_;
  Box box_;
  std::shared_ptr<const PbcDifferenceTable> table_;
  std::shared_ptr<const FbcBoxMatrices> mats_;
};

std::string provider_cache_key(const LatticeSpec& spec, const Box& box, bool fbc_fast);

// ---------------------------------------------------------------------------
// The two window-level routes.

/// Closed-form mode sums (production path).
CorrelatorWindow correlator_window(const LatticeSpec& spec, const Window& window,
                                   const CorrelatorOptions& opt = {});

/// Matrix-function route X = K^{-1/2}/2, P = K^{1/2}/2 through a dense
/// eigendecomposition of the full coupling matrix. Ground truth for tests;
/// capacity-limited like build_coupling_matrix.
CorrelatorWindow correlators_from_coupling(const LatticeSpec& spec, const Window& window);

}  // namespace hlent
