#include "hlent/lattice.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"

namespace hlent {

std::string to_string(Bc bc) { return bc == Bc::Periodic ? "pbc" : "fbc"; }

std::string to_string(Sampling s) { return s == Sampling::IntegerK ? "integer" : "half"; }

long LatticeSpec::total_sites() const {
  long n = 1;
  for (int a = 0; a < dims; ++a) n *= sites_per_axis(a);
  return n;
}

long LatticeSpec::mode_count() const {
  long n = 1;
  for (int a = 0; a < dims; ++a) n *= (bc == Bc::Fixed) ? sizes[a] - 1 : sizes[a];
  return n;
}

bool LatticeSpec::site_valid(const Site& s) const {
  for (int a = 0; a < dims; ++a) {
    if (s.x[a] < site_lo(a) || s.x[a] > site_hi(a)) return false;
  }
  for (int a = dims; a < 3; ++a) {
    if (s.x[a] != 0) return false;
  }
  return true;
}

void LatticeSpec::validate() const {
  if (dims < 1 || dims > 3) throw DomainError("lattice dims must be 1, 2 or 3");
  for (int a = 0; a < dims; ++a) {
    if (sizes[a] < 2) throw DomainError(fmt::format("lattice size L[{}]={} must be >= 2", a, sizes[a]));
  }
  if (omega < 0.0) throw DomainError("omega must be >= 0");
  if (bc == Bc::Fixed && sampling == Sampling::HalfShiftK) {
    throw DomainError("half-shifted momentum sampling applies to periodic lattices only");
  }
  if (bc == Bc::Periodic && sampling == Sampling::IntegerK && omega <= 0.0) {
    throw DomainError("periodic lattice with integer momentum sampling needs omega > 0 (zero mode diverges)");
  }
}

std::string LatticeSpec::key() const {
  std::string s = fmt::format("bc={};dims={};sizes=", to_string(bc), dims);
  for (int a = 0; a < dims; ++a) s += fmt::format("{},", sizes[a]);
  s += fmt::format(";omega={};samp={}", bits_str(omega), to_string(sampling));
  return s;
}

double default_omega(Bc bc, Sampling sampling) {
  if (bc == Bc::Periodic && sampling == Sampling::IntegerK) return 1e-3;
  return 0.0;
}

std::vector<double> axis_modes(const LatticeSpec& spec, int axis) {
  std::vector<double> ks;
  const int L = spec.sizes[axis];
  if (spec.bc == Bc::Fixed) {
    for (int k = 1; k <= L - 1; ++k) ks.push_back(static_cast<double>(k));
  } else if (spec.sampling == Sampling::IntegerK) {
    for (int k = 0; k <= L - 1; ++k) ks.push_back(static_cast<double>(k));
  } else {
    for (int k = 0; k <= L - 1; ++k) ks.push_back(k + 0.5);
  }
  return ks;
}

double mode_frequency(const LatticeSpec& spec, const Mode& k) {
  double s = spec.omega * spec.omega;
  for (int a = 0; a < spec.dims; ++a) {
    const double L = static_cast<double>(spec.sizes[a]);
    const double ka = k.k[a];
    if (spec.bc == Bc::Fixed) {
      if (ka < 1.0 || ka > L - 1.0 || ka != std::floor(ka)) {
        throw DomainError(fmt::format("mode k[{}]={} invalid for fixed-end axis of L={}", a, ka, L));
      }
      const double sn = std::sin(std::numbers::pi * ka / (2.0 * L));
      s += 4.0 * sn * sn;
    } else {
      const bool half = spec.sampling == Sampling::HalfShiftK;
      const double frac = ka - std::floor(ka);
      if (ka < 0.0 || ka > L - (half ? 0.5 : 1.0) || frac != (half ? 0.5 : 0.0)) {
        throw DomainError(fmt::format("mode k[{}]={} invalid for periodic axis of L={}", a, ka, L));
      }
      const double sn = std::sin(std::numbers::pi * ka / L);
      s += 4.0 * sn * sn;
    }
  }
  return std::sqrt(s);
}

std::vector<Site> all_dynamical_sites(const LatticeSpec& spec) {
  std::vector<Site> sites;
  sites.reserve(spec.total_sites());
  const int lo0 = spec.site_lo(0), hi0 = spec.site_hi(0);
  const int lo1 = spec.dims > 1 ? spec.site_lo(1) : 0, hi1 = spec.dims > 1 ? spec.site_hi(1) : 0;
  const int lo2 = spec.dims > 2 ? spec.site_lo(2) : 0, hi2 = spec.dims > 2 ? spec.site_hi(2) : 0;
  for (int x = lo0; x <= hi0; ++x)
    for (int y = lo1; y <= hi1; ++y)
      for (int z = lo2; z <= hi2; ++z) sites.push_back(Site{{x, y, z}});
  return sites;
}

long site_rank(const LatticeSpec& spec, const Site& s) {
  if (!spec.site_valid(s)) throw DomainError("site outside the dynamical lattice");
  long r = 0;
  for (int a = 0; a < spec.dims; ++a) {
    r = r * spec.sites_per_axis(a) + (s.x[a] - spec.site_lo(a));
  }
  return r;
}

Eigen::MatrixXd build_coupling_matrix(const LatticeSpec& spec, long max_sites) {
  const long n = spec.total_sites();
  if (n > max_sites) {
    throw CapacityError(fmt::format("coupling matrix over {} sites exceeds the dense capacity of {}", n, max_sites));
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  const double diag = 2.0 * spec.dims + spec.omega * spec.omega;
  const auto sites = all_dynamical_sites(spec);
  for (long i = 0; i < n; ++i) K(i, i) = diag;
  for (long i = 0; i < n; ++i) {
    const Site& s = sites[i];
    for (int a = 0; a < spec.dims; ++a) {
      for (int dir : {-1, +1}) {
        Site t = s;
        t.x[a] += dir;
        if (spec.bc == Bc::Periodic) {
          const int L = spec.sizes[a];
          t.x[a] = ((t.x[a] % L) + L) % L;
        } else if (t.x[a] < spec.site_lo(a) || t.x[a] > spec.site_hi(a)) {
          continue;  // bond to a clamped boundary site
        }
        const long j = site_rank(spec, t);
        if (j != i) K(i, j) -= 1.0;  // L=2 periodic axes bond twice
      }
    }
  }
  return K;
}

}  // namespace hlent
