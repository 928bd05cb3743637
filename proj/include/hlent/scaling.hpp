#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlent/entanglement.hpp"
#include "hlent/regions.hpp"

namespace hlent {

struct MeasureSpec {
  MeasureKind kind = MeasureKind::LogNegativity;
  double order = 0.5;  // Renyi order for MI/Renyi series

  std::string label() const;
  friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

struct SweepPoint {
  int l = 0;
  double perimeter = 0.0;
  double value = 0.0;
  int clamped = 0;
};

/// One measure evaluated over a scale range for a fixed (lattice, shape, anchor).
struct SweepSeries {
  LatticeSpec spec;
  Shape shape = Shape::Square;
  Anchor anchor;
  MeasureSpec measure;
  std::vector<SweepPoint> points;  // strictly increasing in l
};

struct SweepPlan {
  Shape shape = Shape::Square;
  Anchor anchor;
  int l_min = 6;
  int l_max = 14;
  std::vector<MeasureSpec> measures;
};

/// Evaluates every (l, measure) through regions -> correlators -> measures.
/// All regions must sit inside the provider's box; violations raise a
/// PlacementError naming the offending scale.
std::vector<SweepSeries> run_sweep(const SweepPlan& plan, const CorrelatorProvider& provider,
                                   int workers = 1);

// ---------------------------------------------------------------------------
// Area-law fits.

/// Model basis. The 2D expansions subtract the log term (positive fitted
/// b_total means a positive corner sum); the 3D expansion adds it and
/// subtracts the edge term, with all edge lengths proportional to l
/// collapsed onto one column.
enum class FitBasis { Area2d, Area3dEdge, Area3dNoEdge };

int basis_params(FitBasis basis, int power_order);

struct FitModel {
  FitBasis basis = FitBasis::Area2d;
  int power_order = 0;
  double area = 0.0;       // coefficient of P_B
  double log_coeff = 0.0;  // b_total (2D) or beta_total (3D), sign-adjusted
  double edge_coeff = 0.0; // E, sign-adjusted total edge coefficient (3D)
  double c0 = 0.0;
  std::vector<double> c_inv;  // c_{-1} .. c_{-n}
  double p_min = 0.0, p_end = 0.0;
  int n_points = 0;
  double residual_norm = 0.0;
};

/// Ordinary least squares of the series values on the basis columns over
/// P_B in [p_min, p_end]. Columns are unit-scaled before a column-pivoted
/// QR solve; a rank deficit past 1e-10 raises ContractError.
FitModel fit_area_law(const SweepSeries& series, FitBasis basis, int power_order, double p_min,
                      double p_end);

struct CoefficientStats {
  FitBasis basis = FitBasis::Area2d;
  int power_order = 0;
  int n_fits = 0;
  double log_mean = 0.0, log_std = 0.0;
  double edge_mean = 0.0, edge_std = 0.0;  // 3D with edge column only
};

/// Refits with the end of the window moving over every admissible series
/// point (a window is admissible from params+2 points) and returns the mean
/// and sample standard deviation of the fitted coefficients. Fewer than
/// three admissible windows is a ContractError.
CoefficientStats coefficient_statistics(const SweepSeries& series, FitBasis basis, int power_order,
                                        double p_min);

/// Scans power orders in [n_lo, n_hi] and keeps the admissible order with
/// the smallest std of the log coefficient (ties to the smaller order).
/// `pin` bypasses the scan for cross-run consistency.
std::pair<int, CoefficientStats> select_power_order(const SweepSeries& series, FitBasis basis,
                                                    double p_min, int n_lo = 0, int n_hi = 4,
                                                    std::optional<int> pin = std::nullopt);

// ---------------------------------------------------------------------------
// Corner and edge extraction.

enum class CornerSource { LogNegativity, MutualInfo, Renyi };

std::string to_string(CornerSource s);

struct CornerEstimate {
  double angle = 0.0;
  double value = 0.0;
  double std = 0.0;
  CornerSource source = CornerSource::LogNegativity;
  std::string combination;
};

struct EdgeEstimate {
  double dihedral = 0.0;
  double value = 0.0;
  double std = 0.0;
  std::string combination;
};

/// Corner functions from per-shape fit statistics:
///   b(pi/2)  = b_s/4
///   b(pi/4)  = b_r/2 - b_s/8
///   b(3pi/4) = b_t - b_r/2 - 3 b_s/8   and/or   b_p/2 - b_r/2 + b_s/8
/// with root-sum-square error propagation. A MutualInfo source first halves
/// every total (each shared-boundary vertex contributes its angle twice).
/// Estimates requiring missing shapes are skipped; an empty result for a
/// present square is a ContractError.
std::vector<CornerEstimate> extract_corners_2d(const std::map<Shape, CoefficientStats>& stats,
                                               CornerSource source);

struct Extraction3d {
  std::vector<CornerEstimate> corners;
  std::vector<EdgeEstimate> edges;
};

/// beta(pi/2) = beta_cube/8, e(pi/2) = E_cube/12, and with prism stats also
/// beta(pi/4) = (beta_prism - 2 beta(pi/2))/4,
/// e(pi/4)    = (E_prism - (5+2*sqrt2) e(pi/2))/2.
Extraction3d extract_corners_edges_3d(const CoefficientStats& cube,
                                      const std::optional<CoefficientStats>& prism,
                                      CornerSource source = CornerSource::Renyi);

/// Universal continuum lower bound (pi-theta)^2/(32 pi) on order-1/2 corner
/// functions, 0 < theta <= pi.
double cft_lower_bound(double theta);

/// True when the estimate sits below the bound by more than two stds.
bool below_cft_bound(const CornerEstimate& est);

}  // namespace hlent
