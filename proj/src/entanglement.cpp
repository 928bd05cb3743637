#include "hlent/entanglement.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hlent/errors.hpp"

namespace hlent {

namespace {

// Local indices of `sites` within the window's ordering; DomainError when a
// site is not part of the window.
std::vector<long> local_indices(const CorrelatorWindow& corr, const std::vector<Site>& sites) {
  std::vector<long> idx(sites.size());
  for (size_t i = 0; i < sites.size(); ++i) {
    const auto it = std::lower_bound(corr.window.sites.begin(), corr.window.sites.end(), sites[i]);
    if (it == corr.window.sites.end() || !(*it == sites[i])) {
      throw DomainError("partition site is not part of the window");
    }
    idx[i] = it - corr.window.sites.begin();
  }
  return idx;
}

void check_partition(const CorrelatorWindow& corr, const Partition& part) {
  if (part.a1.size() + part.a2.size() != corr.window.sites.size()) {
    throw DomainError("partition does not cover the window");
  }
  std::vector<Site> joined = part.a1;
  joined.insert(joined.end(), part.a2.begin(), part.a2.end());
  std::sort(joined.begin(), joined.end());
  if (!std::equal(joined.begin(), joined.end(), corr.window.sites.begin())) {
    throw DomainError("partition blocks must be disjoint and cover the window exactly");
  }
}

CorrelatorWindow slice(const CorrelatorWindow& corr, const std::vector<Site>& sites) {
  auto sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  const auto idx = local_indices(corr, sorted);
  const long n = static_cast<long>(idx.size());
  CorrelatorWindow out;
  out.window.spec = corr.window.spec;
  out.window.sites = std::move(sorted);
  out.provenance = corr.provenance;
  out.X.resize(n, n);
  out.P.resize(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      out.X(i, j) = corr.X(idx[i], idx[j]);
      out.P(i, j) = corr.P(idx[i], idx[j]);
    }
  return out;
}

}  // namespace

std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::Entropy: return "entropy";
    case MeasureKind::Renyi: return "renyi";
    case MeasureKind::LogNegativity: return "LN";
    case MeasureKind::MutualInfo: return "MI";
  }
  return "?";
}

SymplecticSpectrum symplectic_spectrum(const CorrelatorWindow& corr,
                                       const std::optional<Partition>& transpose) {
  const long n = corr.X.rows();
  if (n == 0 || corr.X.cols() != n || corr.P.rows() != n || corr.P.cols() != n) {
    throw DomainError("correlator window matrices are empty or mismatched");
  }

  Eigen::MatrixXd P = corr.P;
  if (transpose) {
    check_partition(corr, *transpose);
    const auto i2 = local_indices(corr, transpose->a2);
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(n);
    for (long i : i2) sign(i) = -1.0;
    P = sign.asDiagonal() * P * sign.asDiagonal();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esx(corr.X);
  if (esx.info() != Eigen::Success) throw NumericalError("eigendecomposition of X failed");
  const Eigen::VectorXd& lx = esx.eigenvalues();
  const double scale = std::max(1.0, lx(n - 1));
  if (lx(0) < -1e-12 * scale) {
    throw NumericalError(fmt::format("X restricted to the subsystem is not positive definite (min eig {})", lx(0)));
  }
  const Eigen::MatrixXd root =
      esx.eigenvectors() * lx.array().max(0.0).sqrt().matrix().asDiagonal() * esx.eigenvectors().transpose();

  // Same spectrum as X P but symmetric, so a stable solver applies.
  const Eigen::MatrixXd M = root * P * root;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esm((M + M.transpose()) * 0.5);
  if (esm.info() != Eigen::Success) throw NumericalError("eigendecomposition of X^1/2 P X^1/2 failed");

  SymplecticSpectrum sp;
  sp.transposed = transpose.has_value();
  sp.values.resize(n);
  for (long i = 0; i < n; ++i) {
    double mu = esm.eigenvalues()(i);
    if (mu < kClampFloor) {
      mu = kClampFloor;
      ++sp.clamped;
    }
    sp.values(i) = std::sqrt(mu);
  }
  std::sort(sp.values.data(), sp.values.data() + n);
  return sp;
}

MeasureValue entanglement_entropy(const SymplecticSpectrum& spectrum) {
  if (spectrum.transposed) throw MisuseError("entropy of a partially transposed spectrum is undefined");
  MeasureValue mv;
  mv.kind = MeasureKind::Entropy;
  mv.order = 1.0;
  mv.clamped = spectrum.clamped;
  mv.subsystem_sites = spectrum.values.size();
  double s = 0.0;
  for (long i = 0; i < spectrum.values.size(); ++i) {
    const double xi = spectrum.values(i);
    if (xi <= 0.5 + kDegenerateEps) continue;  // pure mode
    s += (xi + 0.5) * std::log(xi + 0.5) - (xi - 0.5) * std::log(xi - 0.5);
  }
  mv.value = s;
  return mv;
}

MeasureValue renyi_entropy(const SymplecticSpectrum& spectrum, double order) {
  if (spectrum.transposed) throw MisuseError("Renyi entropy of a partially transposed spectrum is undefined");
  if (order == 1.0) throw MisuseError("Renyi order 1 is the entanglement entropy; use that");
  if (!(order > 0.0)) throw MisuseError("Renyi order must be positive");
  MeasureValue mv;
  mv.kind = MeasureKind::Renyi;
  mv.order = order;
  mv.clamped = spectrum.clamped;
  mv.subsystem_sites = spectrum.values.size();
  double s = 0.0;
  for (long i = 0; i < spectrum.values.size(); ++i) {
    const double xi = spectrum.values(i);
    if (xi <= 0.5 + kDegenerateEps) continue;
    // tr rho^n = prod 1/[(xi+1/2)^n - (xi-1/2)^n]
    s += std::log(std::pow(xi + 0.5, order) - std::pow(xi - 0.5, order));
  }
  mv.value = s / (order - 1.0);
  return mv;
}

MeasureValue log_negativity(const CorrelatorWindow& corr, const Partition& part) {
  MeasureValue mv;
  mv.kind = MeasureKind::LogNegativity;
  mv.subsystem_sites = corr.window.sites.size();
  if (part.a2.empty() || part.a1.empty()) {
    check_partition(corr, part);
    mv.value = 0.0;  // nothing transposed
    return mv;
  }
  const SymplecticSpectrum sp = symplectic_spectrum(corr, part);
  mv.clamped = sp.clamped;
  double e = 0.0;
  for (long i = 0; i < sp.values.size(); ++i) {
    const double xi = sp.values(i);
    if (xi < 0.5) e -= std::log(2.0 * xi);
  }
  mv.value = e;
  return mv;
}

MeasureValue mutual_information(const CorrelatorWindow& corrA, const CorrelatorWindow& corrA1,
                                const CorrelatorWindow& corrA2, double order) {
  if (!(corrA.window.spec == corrA1.window.spec) || !(corrA.window.spec == corrA2.window.spec)) {
    throw DomainError("mutual information windows come from different lattices");
  }
  if (corrA1.window.sites.size() + corrA2.window.sites.size() != corrA.window.sites.size()) {
    throw DomainError("A1 and A2 do not partition A");
  }
  MeasureValue mv;
  mv.kind = MeasureKind::MutualInfo;
  mv.order = order;
  mv.subsystem_sites = corrA.window.sites.size();
  auto entropy_of = [&](const CorrelatorWindow& w) {
    if (w.window.sites.empty()) return MeasureValue{MeasureKind::Entropy, order, 0.0, 0, 0};
    const auto sp = symplectic_spectrum(w);
    return order == 1.0 ? entanglement_entropy(sp) : renyi_entropy(sp, order);
  };
  const auto s1 = entropy_of(corrA1);
  const auto s2 = entropy_of(corrA2);
  const auto sa = entropy_of(corrA);
  mv.value = s1.value + s2.value - sa.value;
  mv.clamped = s1.clamped + s2.clamped + sa.clamped;
  return mv;
}

MeasureValue mutual_information(const CorrelatorWindow& corrA, const Partition& part, double order) {
  check_partition(corrA, part);
  if (part.a2.empty() || part.a1.empty()) {
    MeasureValue mv;
    mv.kind = MeasureKind::MutualInfo;
    mv.order = order;
    mv.subsystem_sites = corrA.window.sites.size();
    mv.value = 0.0;  // S_A1 = S_A identically
    return mv;
  }
  return mutual_information(corrA, slice(corrA, part.a1), slice(corrA, part.a2), order);
}

}  // namespace hlent
