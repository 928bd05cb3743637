#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hlent/cache.hpp"
#include "hlent/correlators.hpp"
#include "hlent/errors.hpp"
#include "oracle.hpp"

using namespace hlent;

namespace {

Window box_window(const LatticeSpec& spec, const Box& box) {
  Window w;
  w.spec = spec;
  for (int x = box.lo[0]; x < box.lo[0] + box.extent[0]; ++x)
    for (int y = box.lo[1]; y < box.lo[1] + (spec.dims > 1 ? box.extent[1] : 1); ++y)
      for (int z = box.lo[2]; z < box.lo[2] + (spec.dims > 2 ? box.extent[2] : 1); ++z)
        w.sites.push_back(Site{{x, spec.dims > 1 ? y : 0, spec.dims > 2 ? z : 0}});
  return w;
}

}  // namespace

TEST_CASE("single dynamical site of the smallest fixed-end square") {
  const LatticeSpec spec{2, {2, 2, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const Window w{spec, {Site{{1, 1, 0}}}};
  const auto c = correlator_window(spec, w);
  REQUIRE(c.X.rows() == 1);
  // single mode k=(1,1) with frequency 2
  CHECK(c.X(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.P(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("windows are symmetric with positive diagonals") {
  for (const LatticeSpec& spec :
       {LatticeSpec{2, {9, 7, 0}, Bc::Fixed, 0.0, Sampling::IntegerK},
        LatticeSpec{2, {8, 8, 0}, Bc::Periodic, 0.0, Sampling::HalfShiftK},
        LatticeSpec{1, {10, 0, 0}, Bc::Periodic, 0.2, Sampling::IntegerK}}) {
    const Box box{{spec.site_lo(0) + 1, spec.dims > 1 ? spec.site_lo(1) + 1 : 0, 0},
                  {3, spec.dims > 1 ? 3 : 1, 1}};
    const auto c = correlator_window(spec, box_window(spec, box));
    CHECK(c.X == c.X.transpose().eval());
    CHECK(c.P == c.P.transpose().eval());
    for (long i = 0; i < c.X.rows(); ++i) {
      CHECK(c.X(i, i) > 0.0);
      CHECK(c.P(i, i) > 0.0);
    }
  }
}

TEST_CASE("fixed-end chain matches the matrix functions elementwise") {
  const LatticeSpec spec{1, {8, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const Window w{spec, all_dynamical_sites(spec)};
  const auto sum = correlator_window(spec, w);
  const auto mf = correlators_from_coupling(spec, w);
  CHECK((sum.X - mf.X).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sum.P - mf.P).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(mf.provenance == Provenance::MatrixFunction);
  CHECK(sum.provenance == Provenance::ModeSum);
}

TEST_CASE("matrix-function values on the two-site chain") {
  const LatticeSpec spec{1, {3, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const auto c = correlators_from_coupling(spec, Window{spec, all_dynamical_sites(spec)});
  // K = [[2,-1],[-1,2]] has eigenvalues {1,3}
  const double diag = 0.25 * (1.0 + 1.0 / std::sqrt(3.0));
  CHECK(c.X(0, 0) == doctest::Approx(0.39433756729740643).epsilon(1e-12));
  CHECK(c.X(1, 1) == doctest::Approx(diag).epsilon(1e-12));
}

TEST_CASE("large mass decouples the oscillators") {
  const LatticeSpec spec{2, {6, 6, 0}, Bc::Fixed, 100.0, Sampling::IntegerK};
  const auto c = correlators_from_coupling(spec, Window{spec, all_dynamical_sites(spec)});
  for (long i = 0; i < c.X.rows(); ++i) {
    CHECK(c.X(i, i) == doctest::Approx(1.0 / 200.0).epsilon(1e-3));
    CHECK(c.P(i, i) == doctest::Approx(50.0).epsilon(1e-3));
    for (long j = 0; j < c.X.cols(); ++j) {
      if (i != j) CHECK(std::abs(c.X(i, j)) < 1e-3 * c.X(i, i));
    }
  }
}

TEST_CASE("periodic window: mode sum vs matrix functions at omega=0.1") {
  const LatticeSpec spec{2, {6, 6, 0}, Bc::Periodic, 0.1, Sampling::IntegerK};
  const Box box{{1, 2, 0}, {3, 3, 1}};
  const Window w = box_window(spec, box);
  const auto sum = correlator_window(spec, w);
  const auto mf = correlators_from_coupling(spec, w);
  CHECK((sum.X - mf.X).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sum.P - mf.P).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("oracle equivalence across small lattices") {
  for (const LatticeSpec& spec :
       {LatticeSpec{1, {11, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK},
        LatticeSpec{2, {5, 7, 0}, Bc::Fixed, 0.0, Sampling::IntegerK},
        LatticeSpec{2, {6, 4, 0}, Bc::Periodic, 0.1, Sampling::IntegerK},
        LatticeSpec{3, {3, 3, 4}, Bc::Fixed, 0.0, Sampling::IntegerK},
        LatticeSpec{3, {4, 3, 3}, Bc::Periodic, 0.1, Sampling::IntegerK}}) {
    const Window w{spec, all_dynamical_sites(spec)};
    const auto sum = correlator_window(spec, w);
    const auto ref = oracle::correlators(spec);
    CHECK((sum.X - ref.X).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((sum.P - ref.P).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("periodic entries depend on the coordinate difference only") {
  const LatticeSpec spec{2, {12, 12, 0}, Bc::Periodic, 0.0, Sampling::HalfShiftK};
  const auto table = build_pbc_difference_table(spec, {5, 5, 1});
  const Box box{{2, 3, 0}, {5, 5, 1}};
  const auto c = CorrelatorProvider::from_table(table, box).gather(box_window(spec, box).sites);
  const auto& sites = c.window.sites;
  for (size_t i = 0; i < sites.size(); i += 3) {
    for (size_t j = 0; j < sites.size(); j += 2) {
      for (size_t k = 0; k < sites.size(); k += 3) {
        for (size_t l = 0; l < sites.size(); l += 2) {
          const int d1x = std::abs(sites[i].x[0] - sites[j].x[0]);
          const int d1y = std::abs(sites[i].x[1] - sites[j].x[1]);
          const int d2x = std::abs(sites[k].x[0] - sites[l].x[0]);
          const int d2y = std::abs(sites[k].x[1] - sites[l].x[1]);
          if (d1x == d2x && d1y == d2y) {
            CHECK(c.X(i, j) == c.X(k, l));  // same table entry, bitwise
          }
        }
      }
    }
  }
}

TEST_CASE("fixed-end windows are reflection symmetric") {
  const LatticeSpec spec{2, {9, 9, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const Box box{{2, 3, 0}, {3, 2, 1}};
  const Window w = box_window(spec, box);
  Window wr;
  wr.spec = spec;
  for (const Site& s : w.sites) wr.sites.push_back(Site{{9 - s.x[0], 9 - s.x[1], 0}});
  std::sort(wr.sites.begin(), wr.sites.end());
  const auto a = correlator_window(spec, w);
  const auto b = correlator_window(spec, wr);
  for (size_t i = 0; i < w.sites.size(); ++i) {
    for (size_t j = 0; j < w.sites.size(); ++j) {
      const Site ri{{9 - w.sites[i].x[0], 9 - w.sites[i].x[1], 0}};
      const Site rj{{9 - w.sites[j].x[0], 9 - w.sites[j].x[1], 0}};
      const auto pi = std::lower_bound(wr.sites.begin(), wr.sites.end(), ri) - wr.sites.begin();
      const auto pj = std::lower_bound(wr.sites.begin(), wr.sites.end(), rj) - wr.sites.begin();
      CHECK(a.X(i, j) == doctest::Approx(b.X(pi, pj)).epsilon(1e-12));
    }
  }
}

TEST_CASE("half-shifted sampling stays finite at omega = 0") {
  const LatticeSpec spec{2, {10, 10, 0}, Bc::Periodic, 0.0, Sampling::HalfShiftK};
  const Box box{{0, 0, 0}, {4, 4, 1}};
  const auto c = correlator_window(spec, box_window(spec, box));
  CHECK(c.X.allFinite());
  CHECK(c.P.allFinite());
}

TEST_CASE("error paths") {
  const LatticeSpec div{2, {6, 6, 0}, Bc::Periodic, 0.0, Sampling::IntegerK};
  CHECK_THROWS_AS(correlator_window(div, box_window(div, Box{{0, 0, 0}, {2, 2, 1}})), Error);
  const LatticeSpec spec{2, {6, 6, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  Window bad{spec, {Site{{0, 1, 0}}}};  // boundary site carries no variables
  CHECK_THROWS_AS(correlator_window(spec, bad), DomainError);
  Window dup{spec, {Site{{1, 1, 0}}, Site{{1, 1, 0}}}};
  CHECK_THROWS_AS(correlator_window(spec, dup), DomainError);
}

TEST_CASE("staged fixed-end evaluation matches the direct sum in 3d") {
  const LatticeSpec spec{3, {7, 6, 5}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const Box box{{2, 1, 1}, {3, 3, 2}};
  const auto direct = build_fbc_box(spec, box, false, 2);
  const auto fast = build_fbc_box(spec, box, true, 2);
  CHECK((direct.X - fast.X).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((direct.P - fast.P).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cache round trip reproduces providers bit for bit") {
  const auto dir = std::filesystem::temp_directory_path() / "hlent_test_cache";
  std::filesystem::remove_all(dir);
  CorrelatorCache cache(dir);

  SUBCASE("periodic difference table") {
    const LatticeSpec spec{2, {14, 14, 0}, Bc::Periodic, 0.0, Sampling::HalfShiftK};
    const Box box{{1, 1, 0}, {5, 4, 1}};
    bool hit = true;
    const auto a = cache.load_or_compute(spec, box, {false, 2}, &hit);
    CHECK(!hit);
    const auto b = cache.load_or_compute(spec, box, {false, 2}, &hit);
    CHECK(hit);
    const auto wa = a.gather(box_window(spec, box).sites);
    const auto wb = b.gather(box_window(spec, box).sites);
    CHECK(wa.X == wb.X);
    CHECK(wa.P == wb.P);
  }
  SUBCASE("fixed-end box matrices") {
    const LatticeSpec spec{2, {9, 9, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
    const Box box{{2, 2, 0}, {4, 4, 1}};
    bool hit = true;
    const auto a = cache.load_or_compute(spec, box, {true, 2}, &hit);
    CHECK(!hit);
    const auto b = cache.load_or_compute(spec, box, {true, 2}, &hit);
    CHECK(hit);
    CHECK(a.box_matrices().X == b.box_matrices().X);
    CHECK(a.box_matrices().P == b.box_matrices().P);
    CHECK(!cache.load(spec, Box{{2, 2, 0}, {4, 5, 1}}, true).has_value());
  }
}
