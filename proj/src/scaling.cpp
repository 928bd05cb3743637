#include "hlent/scaling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"

namespace hlent {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

Partition region_partition(const RegionPair& rp) {
  Partition part;
  part.a2 = rp.a2;
  part.a1.reserve(rp.a.size() - rp.a2.size());
  std::set_difference(rp.a.begin(), rp.a.end(), rp.a2.begin(), rp.a2.end(),
                      std::back_inserter(part.a1));
  return part;
}

}  // namespace

std::string MeasureSpec::label() const {
  switch (kind) {
    case MeasureKind::LogNegativity: return "LN";
    case MeasureKind::Entropy: return "S";
    case MeasureKind::Renyi: return fmt::format("S{}", num_str(order));
    case MeasureKind::MutualInfo: return fmt::format("MI{}", num_str(order));
  }
  return "?";
}

std::vector<SweepSeries> run_sweep(const SweepPlan& plan, const CorrelatorProvider& provider,
                                   int workers) {
  if (plan.l_min < 2 || plan.l_max < plan.l_min) throw ContractError("bad sweep scale range");
  if (plan.measures.empty()) throw ContractError("sweep without measures");
  const LatticeSpec& spec = provider.spec();

  // Validate placement for every scale up front so failures name the scale.
  const int n_l = plan.l_max - plan.l_min + 1;
  for (int l = plan.l_min; l <= plan.l_max; ++l) {
    const RegionPair rp = generate_region(plan.shape, l, plan.anchor, spec);
    for (const Site& s : rp.a) {
      if (!provider.box().contains(s, spec.dims)) {
        throw PlacementError(fmt::format("{} at l={} escapes the correlator window", to_string(plan.shape), l));
      }
    }
  }

  std::vector<std::vector<SweepPoint>> values(plan.measures.size(),
                                              std::vector<SweepPoint>(n_l));
  parallel_for(n_l, workers, [&](std::int64_t li) {
    const int l = plan.l_min + static_cast<int>(li);
    const RegionPair rp = generate_region(plan.shape, l, plan.anchor, spec);
    const BoundaryMetrics bm = boundary_metrics(plan.shape, l);
    const CorrelatorWindow corrA = provider.gather(rp.a);
    const Partition part = shape_dims(plan.shape) == 2 ? region_partition(rp) : Partition{};
    for (size_t m = 0; m < plan.measures.size(); ++m) {
      const MeasureSpec& ms = plan.measures[m];
      MeasureValue mv;
      switch (ms.kind) {
        case MeasureKind::LogNegativity:
          mv = log_negativity(corrA, part);
          break;
        case MeasureKind::MutualInfo:
          mv = mutual_information(corrA, part, ms.order);
          break;
        case MeasureKind::Renyi:
          mv = renyi_entropy(symplectic_spectrum(corrA), ms.order);
          break;
        case MeasureKind::Entropy:
          mv = entanglement_entropy(symplectic_spectrum(corrA));
          break;
      }
      values[m][li] = SweepPoint{l, bm.perimeter, mv.value, mv.clamped};
    }
  });

  std::vector<SweepSeries> out;
  for (size_t m = 0; m < plan.measures.size(); ++m) {
    SweepSeries s;
    s.spec = spec;
    s.shape = plan.shape;
    s.anchor = plan.anchor;
    s.measure = plan.measures[m];
    s.points = std::move(values[m]);
    out.push_back(std::move(s));
  }
  return out;
}

int basis_params(FitBasis basis, int power_order) {
  const int base = basis == FitBasis::Area3dEdge ? 4 : 3;  // P, logP, (l), 1
  return base + power_order;
}

FitModel fit_area_law(const SweepSeries& series, FitBasis basis, int power_order, double p_min,
                      double p_end) {
  if (power_order < 0) throw ContractError("power order must be >= 0");
  std::vector<const SweepPoint*> pts;
  for (const SweepPoint& p : series.points) {
    if (p.perimeter >= p_min - 1e-9 && p.perimeter <= p_end + 1e-9) pts.push_back(&p);
  }
  const int params = basis_params(basis, power_order);
  const int n = static_cast<int>(pts.size());
  if (n < params + 2) {
    throw ContractError(fmt::format("fit window holds {} points; {} parameters need at least {}", n,
                                    params, params + 2));
  }

  Eigen::MatrixXd A(n, params);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double P = pts[i]->perimeter;
    int c = 0;
    A(i, c++) = P;
    A(i, c++) = std::log(P);
    if (basis == FitBasis::Area3dEdge) A(i, c++) = static_cast<double>(pts[i]->l);
    A(i, c++) = 1.0;
    for (int k = 1; k <= power_order; ++k) A(i, c++) = std::pow(P, -k);
    y(i) = pts[i]->value;
  }

  // Unit-scale the columns; the log/linear/constant mix is badly conditioned
  // over short windows.
  Eigen::VectorXd scale(params);
  for (int c = 0; c < params; ++c) {
    scale(c) = A.col(c).norm();
    if (scale(c) == 0.0) scale(c) = 1.0;
    A.col(c) /= scale(c);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < params) throw ContractError("fit design matrix is rank deficient");
  Eigen::VectorXd coef = qr.solve(y);
  const double resid = (A * coef - y).norm();
  for (int c = 0; c < params; ++c) coef(c) /= scale(c);

  FitModel fm;
  fm.basis = basis;
  fm.power_order = power_order;
  fm.p_min = p_min;
  fm.p_end = p_end;
  fm.n_points = n;
  fm.residual_norm = resid;
  int c = 0;
  fm.area = coef(c++);
  const double raw_log = coef(c++);
  fm.log_coeff = basis == FitBasis::Area2d ? -raw_log : raw_log;
  if (basis == FitBasis::Area3dEdge) fm.edge_coeff = -coef(c++);
  fm.c0 = coef(c++);
  for (int k = 1; k <= power_order; ++k) fm.c_inv.push_back(coef(c++));
  return fm;
}

CoefficientStats coefficient_statistics(const SweepSeries& series, FitBasis basis, int power_order,
                                        double p_min) {
  std::vector<double> ends;
  for (const SweepPoint& p : series.points) {
    if (p.perimeter >= p_min - 1e-9) ends.push_back(p.perimeter);
  }
  std::sort(ends.begin(), ends.end());
  const int params = basis_params(basis, power_order);
  std::vector<double> logs, edges;
  for (size_t i = 0; i < ends.size(); ++i) {
    if (static_cast<int>(i) + 1 < params + 2) continue;  // window too short
    const FitModel fm = fit_area_law(series, basis, power_order, p_min, ends[i]);
    logs.push_back(fm.log_coeff);
    edges.push_back(fm.edge_coeff);
  }
  if (logs.size() < 3) {
    throw ContractError(fmt::format("only {} admissible fit windows; need at least 3", logs.size()));
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::pair<double, double>(m, std::sqrt(s2 / (v.size() - 1)));
  };
  CoefficientStats cs;
  cs.basis = basis;
  cs.power_order = power_order;
  cs.n_fits = static_cast<int>(logs.size());
  std::tie(cs.log_mean, cs.log_std) = mean_std(logs);
  if (basis == FitBasis::Area3dEdge) std::tie(cs.edge_mean, cs.edge_std) = mean_std(edges);
  return cs;
}

std::pair<int, CoefficientStats> select_power_order(const SweepSeries& series, FitBasis basis,
                                                    double p_min, int n_lo, int n_hi,
                                                    std::optional<int> pin) {
  if (pin) return {*pin, coefficient_statistics(series, basis, *pin, p_min)};
  std::optional<std::pair<int, CoefficientStats>> best;
  for (int n = n_lo; n <= n_hi; ++n) {
    CoefficientStats cs;
    try {
      cs = coefficient_statistics(series, basis, n, p_min);
    } catch (const ContractError&) {
      continue;  // too few windows at this order
    }
    if (!best || cs.log_std < best->second.log_std) best = {n, cs};
  }
  if (!best) throw ContractError("no admissible power order in the requested range");
  return *best;
}

std::string to_string(CornerSource s) {
  switch (s) {
    case CornerSource::LogNegativity: return "LN";
    case CornerSource::MutualInfo: return "MI";
    case CornerSource::Renyi: return "renyi";
  }
  return "?";
}

std::vector<CornerEstimate> extract_corners_2d(const std::map<Shape, CoefficientStats>& stats,
                                               CornerSource source) {
  // MI totals count every shared-boundary vertex from both sides.
  const double f = source == CornerSource::MutualInfo ? 0.5 : 1.0;
  auto get = [&](Shape s) -> std::optional<std::pair<double, double>> {
    const auto it = stats.find(s);
    if (it == stats.end()) return std::nullopt;
    return std::make_pair(f * it->second.log_mean, f * it->second.log_std);
  };
  const auto bs = get(Shape::Square);
  const auto br = get(Shape::IsoRightTriangle);
  const auto bt = get(Shape::RightTrapezoid);
  const auto bp = get(Shape::Parallelogram);
  if (!bs) throw ContractError("corner extraction needs at least the square statistics");

  std::vector<CornerEstimate> out;
  out.push_back({kPi / 2, bs->first / 4.0, bs->second / 4.0, source, "bs/4"});
  if (br) {
    const double v = br->first / 2.0 - bs->first / 8.0;
    const double e = std::hypot(br->second / 2.0, bs->second / 8.0);
    out.push_back({kPi / 4, v, e, source, "br/2-bs/8"});
    if (bt) {
      const double vt = bt->first - br->first / 2.0 - 3.0 * bs->first / 8.0;
      const double et = std::sqrt(bt->second * bt->second + std::pow(br->second / 2.0, 2) +
                                  std::pow(3.0 * bs->second / 8.0, 2));
      out.push_back({3 * kPi / 4, vt, et, source, "bt-br/2-3bs/8"});
    }
    if (bp) {
      const double vp = bp->first / 2.0 - br->first / 2.0 + bs->first / 8.0;
      const double ep = std::sqrt(std::pow(bp->second / 2.0, 2) + std::pow(br->second / 2.0, 2) +
                                  std::pow(bs->second / 8.0, 2));
      out.push_back({3 * kPi / 4, vp, ep, source, "bp/2-br/2+bs/8"});
    }
  }
  return out;
}

Extraction3d extract_corners_edges_3d(const CoefficientStats& cube,
                                      const std::optional<CoefficientStats>& prism,
                                      CornerSource source) {
  if (cube.basis != FitBasis::Area3dEdge) {
    throw ContractError("3d extraction needs cube statistics fitted with the edge column");
  }
  Extraction3d out;
  const double b2 = cube.log_mean / 8.0;
  const double b2s = cube.log_std / 8.0;
  const double e2 = cube.edge_mean / 12.0;
  const double e2s = cube.edge_std / 12.0;
  out.corners.push_back({kPi / 2, b2, b2s, source, "beta_cube/8"});
  out.edges.push_back({kPi / 2, e2, e2s, "E_cube/12"});
  if (prism) {
    if (prism->basis != FitBasis::Area3dEdge) {
      throw ContractError("3d extraction needs prism statistics fitted with the edge column");
    }
    // beta_prism = 4 beta(pi/4) + 2 beta(pi/2); E_prism = 2 e(pi/4) + (5+2sqrt2) e(pi/2)
    const double b4 = prism->log_mean / 4.0 - b2 / 2.0;
    const double b4s = std::hypot(prism->log_std / 4.0, b2s / 2.0);
    const double w = 5.0 + 2.0 * kSqrt2;
    const double e4 = prism->edge_mean / 2.0 - w * e2 / 2.0;
    const double e4s = std::hypot(prism->edge_std / 2.0, w * e2s / 2.0);
    out.corners.push_back({kPi / 4, b4, b4s, source, "(beta_prism-2beta(pi/2))/4"});
    out.edges.push_back({kPi / 4, e4, e4s, "(E_prism-(5+2sqrt2)e(pi/2))/2"});
  }
  return out;
}

double cft_lower_bound(double theta) {
  if (!(theta > 0.0 && theta <= kPi + 1e-12)) throw DomainError("corner angle must be in (0, pi]");
  const double d = kPi - theta;
  return d * d / (32.0 * kPi);
}

bool below_cft_bound(const CornerEstimate& est) {
  return est.value < cft_lower_bound(est.angle) - 2.0 * est.std;
}

}  // namespace hlent
