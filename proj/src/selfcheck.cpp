#include <fmt/format.h>

#include <cmath>
#include <ostream>

#include "hlent/entanglement.hpp"
#include "hlent/pipeline.hpp"
#include "hlent/scaling.hpp"

namespace hlent {

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Window full_window(const LatticeSpec& spec) {
  return Window{spec, all_dynamical_sites(spec)};
}

}  // namespace

bool selfcheck(int workers, std::ostream& out) {
  bool ok = true;
  auto check = [&](bool cond, const std::string& what) {
    out << (cond ? "[ok]   " : "[FAIL] ") << what << "\n";
    ok = ok && cond;
  };

  // Mode sums against the matrix-function route.
  double worst = 0.0;
  for (int L = 2; L <= 8; ++L) {
    const LatticeSpec spec{1, {L, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
    const Window w = full_window(spec);
    const auto a = correlator_window(spec, w, {false, workers});
    const auto b = correlators_from_coupling(spec, w);
    worst = std::max({worst, max_abs_diff(a.X, b.X), max_abs_diff(a.P, b.P)});
  }
  for (int L1 = 2; L1 <= 5; ++L1) {
    for (int L2 = 2; L2 <= 5; ++L2) {
      const LatticeSpec spec{2, {L1, L2, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
      const Window w = full_window(spec);
      const auto a = correlator_window(spec, w, {false, workers});
      const auto b = correlators_from_coupling(spec, w);
      worst = std::max({worst, max_abs_diff(a.X, b.X), max_abs_diff(a.P, b.P)});
    }
  }
  check(worst < 1e-9, fmt::format("fixed-end mode sums match K^(+-1/2)/2 (max |diff| = {:.2e})", worst));

  worst = 0.0;
  for (int L = 2; L <= 6; ++L) {
    const LatticeSpec spec{1, {L, 0, 0}, Bc::Periodic, 0.1, Sampling::IntegerK};
    const Window w = full_window(spec);
    const auto a = correlator_window(spec, w, {false, workers});
    const auto b = correlators_from_coupling(spec, w);
    worst = std::max({worst, max_abs_diff(a.X, b.X), max_abs_diff(a.P, b.P)});
  }
  for (int L1 = 2; L1 <= 4; ++L1) {
    for (int L2 = 2; L2 <= 4; ++L2) {
      const LatticeSpec spec{2, {L1, L2, 0}, Bc::Periodic, 0.1, Sampling::IntegerK};
      const Window w = full_window(spec);
      const auto a = correlator_window(spec, w, {false, workers});
      const auto b = correlators_from_coupling(spec, w);
      worst = std::max({worst, max_abs_diff(a.X, b.X), max_abs_diff(a.P, b.P)});
    }
  }
  check(worst < 1e-9, fmt::format("periodic mode sums match K^(+-1/2)/2 (max |diff| = {:.2e})", worst));

  // Staged sine-transform path against the per-entry sum.
  {
    const LatticeSpec spec{2, {13, 11, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
    const Box box{{3, 2, 0}, {6, 5, 1}};
    const auto direct = build_fbc_box(spec, box, false, workers);
    const auto fast = build_fbc_box(spec, box, true, workers);
    const double d = std::max(max_abs_diff(direct.X, fast.X), max_abs_diff(direct.P, fast.P));
    check(d < 1e-12, fmt::format("fixed-end fast path matches the direct sum (max |diff| = {:.2e})", d));
  }

  // Ground-state spectrum bound and LN partition symmetry.
  {
    const LatticeSpec spec{2, {8, 8, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
    std::vector<Site> sites;
    for (int x = 2; x <= 5; ++x)
      for (int y = 2; y <= 5; ++y) sites.push_back(Site{{x, y, 0}});
    const auto corr = correlator_window(spec, Window{spec, sites}, {false, workers});
    const auto sp = symplectic_spectrum(corr);
    check(sp.values.minCoeff() >= 0.5 - 1e-9,
          fmt::format("symplectic eigenvalues respect xi >= 1/2 (min = {})", sp.values.minCoeff()));
    Partition part;
    for (const Site& s : sites) (s.x[0] <= 3 ? part.a1 : part.a2).push_back(s);
    const double e12 = log_negativity(corr, part).value;
    std::swap(part.a1, part.a2);
    const double e21 = log_negativity(corr, part).value;
    check(std::abs(e12 - e21) < 1e-9,
          fmt::format("log negativity is partition symmetric (|diff| = {:.2e})", std::abs(e12 - e21)));
    const double mi = mutual_information(corr, part, 1.0).value;
    check(mi >= -1e-9, fmt::format("mutual information at order 1 is nonnegative ({})", mi));
  }

  // Purity: complementary halves of a pure chain share their entropy.
  {
    const LatticeSpec spec{1, {12, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
    const auto corr = correlator_window(spec, full_window(spec), {false, workers});
    Partition part;
    for (const Site& s : corr.window.sites) (s.x[0] <= 5 ? part.a1 : part.a2).push_back(s);
    const auto mi = mutual_information(corr, part, 1.0);
    const auto sa = entanglement_entropy(symplectic_spectrum(corr));
    // S_A1 + S_A2 - S_A with S_A ~ 0 forces S_A1 = S_A2 = I/2.
    check(sa.value < 1e-6 && mi.value >= -1e-9,
          fmt::format("whole chain is pure (S = {:.2e})", sa.value));
  }

  // Exact fit recovery.
  {
    SweepSeries s;
    s.shape = Shape::Square;
    s.measure = {MeasureKind::LogNegativity, 0.0};
    for (int l = 6; l <= 15; ++l) {
      const double P = 4.0 * l;
      s.points.push_back({l, P, 0.5 * P - 0.1 * std::log(P) + 0.3, 0});
    }
    const FitModel fm = fit_area_law(s, FitBasis::Area2d, 0, 24.0, 60.0);
    const double err = std::max({std::abs(fm.area - 0.5), std::abs(fm.log_coeff - 0.1),
                                 std::abs(fm.c0 - 0.3)});
    check(err < 1e-10, fmt::format("least squares recovers an exact model (max coeff err = {:.2e})", err));
  }

  out << (ok ? "verify: all checks passed\n" : "verify: FAILURES above\n");
  return ok;
}

}  // namespace hlent
