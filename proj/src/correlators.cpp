#include "hlent/correlators.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"

namespace hlent {

namespace {

constexpr double kPi = std::numbers::pi;

long modes_per_axis(const LatticeSpec& spec, int axis) {
  return spec.bc == Bc::Fixed ? spec.sizes[axis] - 1 : spec.sizes[axis];
}

// Flat tensors of 1/(2 omega_k) and omega_k/2 over all modes, row-major
// over the axes. The 1/V normalization lives in the per-axis factors.
void mode_weights(const LatticeSpec& spec, std::vector<double>& wx, std::vector<double>& wp) {
  std::array<std::vector<double>, 3> sin2;  // 4 sin^2 term per axis mode
  long total = 1;
  for (int a = 0; a < spec.dims; ++a) {
    const auto ks = axis_modes(spec, a);
    sin2[a].resize(ks.size());
    const double L = spec.sizes[a];
    for (size_t i = 0; i < ks.size(); ++i) {
      const double arg = spec.bc == Bc::Fixed ? kPi * ks[i] / (2.0 * L) : kPi * ks[i] / L;
      const double s = std::sin(arg);
      sin2[a][i] = 4.0 * s * s;
    }
    total *= static_cast<long>(ks.size());
  }
  wx.resize(total);
  wp.resize(total);
  const double w2 = spec.omega * spec.omega;
  const long n0 = sin2[0].size();
  const long n1 = spec.dims > 1 ? sin2[1].size() : 1;
  const long n2 = spec.dims > 2 ? sin2[2].size() : 1;
  long idx = 0;
  for (long i0 = 0; i0 < n0; ++i0) {
    const double s0 = w2 + sin2[0][i0];
    for (long i1 = 0; i1 < n1; ++i1) {
      const double s1 = s0 + (spec.dims > 1 ? sin2[1][i1] : 0.0);
      for (long i2 = 0; i2 < n2; ++i2, ++idx) {
        const double om = std::sqrt(s1 + (spec.dims > 2 ? sin2[2][i2] : 0.0));
        if (om <= 0.0) {
          throw NumericalError("divergent zero mode: periodic IntegerK sampling needs omega > 0");
        }
        wx[idx] = 0.5 / om;
        wp[idx] = 0.5 * om;
      }
    }
  }
}

// Contracts a flat mode tensor against one factor matrix per axis:
//   out[r0,...,r_{d-1}] = sum_k prod_a factor_a(r_a, k_a) * weights[k]
// Each stage replaces one mode axis by a row axis; sums are compensated and
// evaluated in a fixed order, so the result is independent of `workers`.
std::vector<double> contract_modes(int dims, const std::vector<double>& weights,
                                   const std::array<std::vector<double>, 3>& factors,
                                   const std::array<long, 3>& rows, const std::array<long, 3>& nmodes,
                                   int workers) {
  std::vector<double> cur = weights;
  std::array<long, 3> shape{};  // current tensor shape: rows for done axes, modes after
  for (int a = 0; a < dims; ++a) shape[a] = nmodes[a];
  for (int axis = 0; axis < dims; ++axis) {
    long pre = 1, post = 1;
    for (int b = 0; b < axis; ++b) pre *= rows[b];
    for (int b = axis + 1; b < dims; ++b) post *= nmodes[b];
    const long L = nmodes[axis];
    const long R = rows[axis];
    const std::vector<double>& f = factors[axis];
    std::vector<double> next(pre * R * post);
    parallel_for(pre * R, workers, [&](std::int64_t pr) {
      const long p = pr / R;
      const long r = pr % R;
      const double* frow = f.data() + r * L;
      const double* in = cur.data() + p * L * post;
      double* out = next.data() + (p * R + r) * post;
      if (post == 1) {
        KahanSum acc;
        for (long k = 0; k < L; ++k) acc.add(frow[k] * in[k]);
        out[0] = acc.value();
      } else {
        for (long q = 0; q < post; ++q) {
          KahanSum acc;
          for (long k = 0; k < L; ++k) acc.add(frow[k] * in[k * post + q]);
          out[q] = acc.value();
        }
      }
    });
    cur = std::move(next);
    shape[axis] = R;
  }
  return cur;
}

// sqrt(2/L) sin(pi j k / L) for j in [lo, lo+n); rows indexed by j - lo.
std::vector<double> fbc_site_factor(const LatticeSpec& spec, int axis, int lo, long n) {
  const double L = spec.sizes[axis];
  const long m = modes_per_axis(spec, axis);
  std::vector<double> f(n * m);
  const double norm = std::sqrt(2.0 / L);
  for (long j = 0; j < n; ++j)
    for (long k = 0; k < m; ++k) f[j * m + k] = norm * std::sin(kPi * (lo + j) * (k + 1) / L);
  return f;
}

// cos(2 pi k d / L) / L for d in [0, extent).
std::vector<double> pbc_diff_factor(const LatticeSpec& spec, int axis, long extent) {
  const double L = spec.sizes[axis];
  const auto ks = axis_modes(spec, axis);
  const long m = static_cast<long>(ks.size());
  std::vector<double> f(extent * m);
  for (long d = 0; d < extent; ++d)
    for (long k = 0; k < m; ++k) f[d * m + k] = std::cos(2.0 * kPi * ks[k] * d / L) / L;
  return f;
}

}  // namespace

bool Box::contains(const Site& s, int dims) const {
  for (int a = 0; a < dims; ++a) {
    if (s.x[a] < lo[a] || s.x[a] >= lo[a] + extent[a]) return false;
  }
  return true;
}

long Box::volume(int dims) const {
  long v = 1;
  for (int a = 0; a < dims; ++a) v *= extent[a];
  return v;
}

std::string Box::key(int dims) const {
  std::string s = "box=";
  for (int a = 0; a < dims; ++a) s += fmt::format("{}+{},", lo[a], extent[a]);
  return s;
}

Box bounding_box(std::span<const Site> sites, int dims) {
  if (sites.empty()) throw DomainError("bounding box of an empty site list");
  Box b;
  for (int a = 0; a < 3; ++a) {
    int mn = sites[0].x[a], mx = sites[0].x[a];
    for (const Site& s : sites) {
      mn = std::min(mn, s.x[a]);
      mx = std::max(mx, s.x[a]);
    }
    b.lo[a] = mn;
    b.extent[a] = mx - mn + 1;
  }
  for (int a = dims; a < 3; ++a) {
    b.lo[a] = 0;
    b.extent[a] = 1;
  }
  return b;
}

void Window::validate() const {
  spec.validate();
  if (sites.empty()) throw DomainError("window has no sites");
  for (size_t i = 0; i < sites.size(); ++i) {
    if (!spec.site_valid(sites[i])) {
      throw DomainError(fmt::format("window site ({},{},{}) outside the dynamical lattice", sites[i].x[0],
                                    sites[i].x[1], sites[i].x[2]));
    }
    if (i > 0 && !(sites[i - 1] < sites[i])) {
      throw DomainError("window sites must be strictly increasing (lexicographic)");
    }
  }
}

double PbcDifferenceTable::x_at(const Site& r, const Site& s) const {
  long idx = 0;
  for (int a = 0; a < spec.dims; ++a) {
    const long d = std::abs(r.x[a] - s.x[a]);
    idx = idx * extent[a] + d;
  }
  return x[idx];
}

double PbcDifferenceTable::p_at(const Site& r, const Site& s) const {
  long idx = 0;
  for (int a = 0; a < spec.dims; ++a) {
    const long d = std::abs(r.x[a] - s.x[a]);
    idx = idx * extent[a] + d;
  }
  return p[idx];
}

PbcDifferenceTable build_pbc_difference_table(const LatticeSpec& spec, std::array<int, 3> extent,
                                              int workers) {
  spec.validate();
  if (spec.bc != Bc::Periodic) throw DomainError("difference tables exist for periodic lattices only");
  for (int a = 0; a < spec.dims; ++a) {
    if (extent[a] < 1 || extent[a] > spec.sizes[a]) {
      throw DomainError(fmt::format("table extent {} invalid for axis of L={}", extent[a], spec.sizes[a]));
    }
  }
  std::vector<double> wx, wp;
  mode_weights(spec, wx, wp);
  std::array<std::vector<double>, 3> factors;
  std::array<long, 3> rows{1, 1, 1}, nmodes{1, 1, 1};
  for (int a = 0; a < spec.dims; ++a) {
    factors[a] = pbc_diff_factor(spec, a, extent[a]);
    rows[a] = extent[a];
    nmodes[a] = modes_per_axis(spec, a);
  }
  PbcDifferenceTable t;
  t.spec = spec;
  t.extent = extent;
  t.x = contract_modes(spec.dims, wx, factors, rows, nmodes, workers);
  t.p = contract_modes(spec.dims, wp, factors, rows, nmodes, workers);
  return t;
}

long FbcBoxMatrices::index_of(const Site& s) const {
  long idx = 0;
  for (int a = 0; a < spec.dims; ++a) {
    const long c = s.x[a] - box.lo[a];
    if (c < 0 || c >= box.extent[a]) throw DomainError("site outside the correlator box");
    idx = idx * box.extent[a] + c;
  }
  return idx;
}

namespace {

FbcBoxMatrices fbc_box_direct(const LatticeSpec& spec, const Box& box, int workers) {
  std::vector<double> wx, wp;
  mode_weights(spec, wx, wp);
  std::array<std::vector<double>, 3> sf;
  std::array<long, 3> nm{1, 1, 1};
  for (int a = 0; a < spec.dims; ++a) {
    sf[a] = fbc_site_factor(spec, a, box.lo[a], box.extent[a]);
    nm[a] = modes_per_axis(spec, a);
  }
  const long n = box.volume(spec.dims);
  FbcBoxMatrices out;
  out.spec = spec;
  out.box = box;
  out.X.resize(n, n);
  out.P.resize(n, n);
  const long npairs = n * (n + 1) / 2;
  // Row-major local coordinates of the i-th box site.
  auto coords = [&](long i, std::array<long, 3>& c) {
    for (int a = spec.dims - 1; a >= 0; --a) {
      c[a] = i % box.extent[a];
      i /= box.extent[a];
    }
  };
  parallel_for(npairs, workers, [&](std::int64_t pair) {
    // Unrank pair = j(j+1)/2 + k with k <= j.
    long j = static_cast<long>((std::sqrt(8.0 * pair + 1.0) - 1.0) / 2.0);
    while (j * (j + 1) / 2 > pair) --j;
    while ((j + 1) * (j + 2) / 2 <= pair) ++j;
    const long k = pair - j * (j + 1) / 2;
    std::array<long, 3> ci{}, cj{};
    coords(k, ci);
    coords(j, cj);
    // Per-axis products for this site pair.
    const long m0 = nm[0], m1 = nm[1], m2 = nm[2];
    std::array<std::vector<double>, 3> pr;
    for (int a = 0; a < spec.dims; ++a) {
      pr[a].resize(nm[a]);
      const double* fi = sf[a].data() + ci[a] * nm[a];
      const double* fj = sf[a].data() + cj[a] * nm[a];
      for (long q = 0; q < nm[a]; ++q) pr[a][q] = fi[q] * fj[q];
    }
    KahanSum ax, ap;
    const double* p0 = pr[0].data();
    const double* p1 = spec.dims > 1 ? pr[1].data() : nullptr;
    const double* p2 = spec.dims > 2 ? pr[2].data() : nullptr;
    long idx = 0;
    for (long q0 = 0; q0 < m0; ++q0) {
      const double v0 = p0[q0];
      for (long q1 = 0; q1 < m1; ++q1) {
        const double v1 = p1 ? v0 * p1[q1] : v0;
        for (long q2 = 0; q2 < m2; ++q2, ++idx) {
          const double c = p2 ? v1 * p2[q2] : v1;
          ax.add(wx[idx] * c);
          ap.add(wp[idx] * c);
        }
      }
    }
    out.X(k, j) = out.X(j, k) = ax.value();
    out.P(k, j) = out.P(j, k) = ap.value();
  });
  return out;
}

FbcBoxMatrices fbc_box_fast(const LatticeSpec& spec, const Box& box, int workers) {
  std::vector<double> wx, wp;
  mode_weights(spec, wx, wp);
  std::array<std::vector<double>, 3> pairf;
  std::array<long, 3> rows{1, 1, 1}, nm{1, 1, 1};
  std::array<long, 3> w{1, 1, 1};
  for (int a = 0; a < spec.dims; ++a) {
    w[a] = box.extent[a];
    nm[a] = modes_per_axis(spec, a);
    const auto site = fbc_site_factor(spec, a, box.lo[a], w[a]);
    pairf[a].resize(w[a] * w[a] * nm[a]);
    for (long i = 0; i < w[a]; ++i)
      for (long j = 0; j < w[a]; ++j) {
        double* dst = pairf[a].data() + (i * w[a] + j) * nm[a];
        const double* fi = site.data() + i * nm[a];
        const double* fj = site.data() + j * nm[a];
        for (long k = 0; k < nm[a]; ++k) dst[k] = fi[k] * fj[k];
      }
    rows[a] = w[a] * w[a];
  }
  const auto tx = contract_modes(spec.dims, wx, pairf, rows, nm, workers);
  const auto tp = contract_modes(spec.dims, wp, pairf, rows, nm, workers);
  // Reshape pair-axis tensors [(i0 j0),(i1 j1),(i2 j2)] into site matrices.
  const long n = box.volume(spec.dims);
  FbcBoxMatrices out;
  out.spec = spec;
  out.box = box;
  out.X.resize(n, n);
  out.P.resize(n, n);
  const long w0 = w[0], w1 = w[1], w2 = w[2];
  parallel_for(n, workers, [&](std::int64_t i) {
    const long i2 = i % w2;
    const long i1 = (i / w2) % w1;
    const long i0 = i / (w1 * w2);
    for (long j = 0; j < n; ++j) {
      const long j2 = j % w2;
      const long j1 = (j / w2) % w1;
      const long j0 = j / (w1 * w2);
      const long t = ((i0 * w0 + j0) * (w1 * w1) + (i1 * w1 + j1)) * (w2 * w2) + (i2 * w2 + j2);
      out.X(i, j) = tx[t];
      out.P(i, j) = tp[t];
    }
  });
  return out;
}

}  // namespace

FbcBoxMatrices build_fbc_box(const LatticeSpec& spec, const Box& box, bool fast, int workers) {
  spec.validate();
  if (spec.bc != Bc::Fixed) throw DomainError("box correlators: fixed-end lattices only");
  for (int a = 0; a < spec.dims; ++a) {
    if (box.lo[a] < spec.site_lo(a) || box.lo[a] + box.extent[a] - 1 > spec.site_hi(a)) {
      throw DomainError(fmt::format("correlator box escapes the dynamical sites on axis {}", a));
    }
  }
  return fast ? fbc_box_fast(spec, box, workers) : fbc_box_direct(spec, box, workers);
}

CorrelatorProvider CorrelatorProvider::compute(const LatticeSpec& spec, const Box& box,
                                               const CorrelatorOptions& opt) {
  spec.validate();
  CorrelatorProvider p;
  p.spec_ = spec;
  p.box_ = box;
  if (spec.bc == Bc::Periodic) {
    p.table_ = std::make_shared<PbcDifferenceTable>(
        build_pbc_difference_table(spec, box.extent, opt.workers));
  } else {
    p.mats_ = std::make_shared<FbcBoxMatrices>(build_fbc_box(spec, box, opt.fbc_fast, opt.workers));
  }
  return p;
}

CorrelatorProvider CorrelatorProvider::from_table(PbcDifferenceTable table, Box box) {
  CorrelatorProvider p;
  p.spec_ = table.spec;
  p.box_ = box;
  p.table_ = std::make_shared<PbcDifferenceTable>(std::move(table));
  return p;
}

CorrelatorProvider CorrelatorProvider::from_box(FbcBoxMatrices mats) {
  CorrelatorProvider p;
  p.spec_ = mats.spec;
  p.box_ = mats.box;
  p.mats_ = std::make_shared<FbcBoxMatrices>(std::move(mats));
  return p;
}

CorrelatorWindow CorrelatorProvider::gather(std::span<const Site> sites) const {
  const long n = static_cast<long>(sites.size());
  CorrelatorWindow cw;
  cw.window.spec = spec_;
  cw.window.sites.assign(sites.begin(), sites.end());
  cw.window.validate();
  cw.provenance = Provenance::ModeSum;
  cw.X.resize(n, n);
  cw.P.resize(n, n);
  if (table_) {
    for (long i = 0; i < n; ++i) {
      for (long j = i; j < n; ++j) {
        cw.X(i, j) = cw.X(j, i) = table_->x_at(sites[i], sites[j]);
        cw.P(i, j) = cw.P(j, i) = table_->p_at(sites[i], sites[j]);
      }
    }
  } else {
    std::vector<long> idx(n);
    for (long i = 0; i < n; ++i) idx[i] = mats_->index_of(sites[i]);
    for (long i = 0; i < n; ++i) {
      for (long j = 0; j < n; ++j) {
        cw.X(i, j) = mats_->X(idx[i], idx[j]);
        cw.P(i, j) = mats_->P(idx[i], idx[j]);
      }
    }
  }
  return cw;
}

std::string provider_cache_key(const LatticeSpec& spec, const Box& box, bool fbc_fast) {
  if (spec.bc == Bc::Periodic) {
    std::string s = spec.key() + ";table;ext=";
    for (int a = 0; a < spec.dims; ++a) s += fmt::format("{},", box.extent[a]);
    return s;
  }
  return spec.key() + ";" + box.key(spec.dims) + (fbc_fast ? ";dst" : ";direct");
}

std::string CorrelatorProvider::cache_key() const {
  return provider_cache_key(spec_, box_, false);
}

CorrelatorWindow correlator_window(const LatticeSpec& spec, const Window& window,
                                   const CorrelatorOptions& opt) {
  if (!(window.spec == spec)) throw DomainError("window was built for a different lattice");
  window.validate();
  if (spec.bc == Bc::Periodic && spec.sampling == Sampling::IntegerK && spec.omega <= 0.0) {
    throw NumericalError("divergent zero mode: periodic IntegerK sampling needs omega > 0");
  }
  const Box bbox = bounding_box(window.sites, spec.dims);
  const auto provider = CorrelatorProvider::compute(spec, bbox, opt);
  return provider.gather(window.sites);
}

CorrelatorWindow correlators_from_coupling(const LatticeSpec& spec, const Window& window) {
  if (!(window.spec == spec)) throw DomainError("window was built for a different lattice");
  window.validate();
  const Eigen::MatrixXd K = build_coupling_matrix(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw NumericalError("coupling matrix eigendecomposition failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  if (lam(0) < -1e-12) {
    throw NumericalError(fmt::format("coupling matrix has negative eigenvalue {}", lam(0)));
  }
  if (lam(0) <= 1e-14) {
    throw NumericalError("coupling matrix is singular; check bc/omega (zero mode?)");
  }
  const long n = static_cast<long>(window.sites.size());
  Eigen::MatrixXd U(n, lam.size());
  for (long i = 0; i < n; ++i) U.row(i) = es.eigenvectors().row(site_rank(spec, window.sites[i]));
  CorrelatorWindow cw;
  cw.window = window;
  cw.provenance = Provenance::MatrixFunction;
  const Eigen::ArrayXd root = lam.array().sqrt();
  cw.X = 0.5 * U * root.inverse().matrix().asDiagonal() * U.transpose();
  cw.P = 0.5 * U * root.matrix().asDiagonal() * U.transpose();
  // Symmetrize away the eigensolver's rounding skew.
  cw.X = ((cw.X + cw.X.transpose()) * 0.5).eval();
  cw.P = ((cw.P + cw.P.transpose()) * 0.5).eval();
  return cw;
}

}  // namespace hlent
