#include <doctest.h>

#include <cmath>
#include <random>

#include "hlent/entanglement.hpp"
#include "hlent/errors.hpp"
#include "oracle.hpp"

using namespace hlent;

namespace {

CorrelatorWindow chain_window(int L, int first, int last) {
  const LatticeSpec spec{1, {L, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  Window w;
  w.spec = spec;
  for (int x = first; x <= last; ++x) w.sites.push_back(Site{{x, 0, 0}});
  return correlator_window(spec, w);
}

SymplecticSpectrum spectrum_of(const Eigen::VectorXd& xs) {
  SymplecticSpectrum sp;
  sp.values = xs;
  return sp;
}

}  // namespace

TEST_CASE("whole system is pure: every xi equals 1/2") {
  const LatticeSpec spec{2, {4, 4, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const auto corr = correlator_window(spec, Window{spec, all_dynamical_sites(spec)});
  const auto sp = symplectic_spectrum(corr);
  CHECK(!sp.transposed);
  CHECK(sp.values.size() == 9);
  for (long i = 0; i < sp.values.size(); ++i) {
    CHECK(sp.values(i) == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("single site of the smallest fixed-end square") {
  const LatticeSpec spec{2, {2, 2, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
  const auto corr = correlator_window(spec, Window{spec, {Site{{1, 1, 0}}}});
  const auto sp = symplectic_spectrum(corr);
  CHECK(sp.values(0) == doctest::Approx(0.5).epsilon(1e-12));  // sqrt(0.25 * 1.0)
}

TEST_CASE("chain subsystem spectrum matches the dense oracle") {
  const auto corr = chain_window(8, 1, 3);
  const auto sp = symplectic_spectrum(corr);
  const auto ref = oracle::correlators(corr.window.spec);
  const auto xs = oracle::spectrum(oracle::submatrix(ref.X, {0, 1, 2}), oracle::submatrix(ref.P, {0, 1, 2}));
  REQUIRE(sp.values.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(sp.values(i) == doctest::Approx(xs[i]).epsilon(1e-9));
  // frozen values from the reference route
  CHECK(sp.values(0) == doctest::Approx(0.5000000065565389).epsilon(1e-9));
  CHECK(sp.values(1) == doctest::Approx(0.5000687150596179).epsilon(1e-9));
  CHECK(sp.values(2) == doctest::Approx(0.5633498331590948).epsilon(1e-9));
}

TEST_CASE("entropy formula") {
  Eigen::VectorXd flat(3);
  flat << 0.5, 0.5, 0.5;
  CHECK(entanglement_entropy(spectrum_of(flat)).value == 0.0);

  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK(entanglement_entropy(spectrum_of(one)).value ==
        doctest::Approx(0.9547712524422192).epsilon(1e-12));

  SymplecticSpectrum transposed = spectrum_of(one);
  transposed.transposed = true;
  CHECK_THROWS_AS(entanglement_entropy(transposed), MisuseError);
}

TEST_CASE("chain entropy and purity") {
  const auto corr = chain_window(8, 1, 3);
  const auto s = entanglement_entropy(symplectic_spectrum(corr));
  CHECK(s.value == doctest::Approx(0.24083032114446834).epsilon(1e-9));
  // complementary half of the full pure chain
  const auto left = chain_window(12, 1, 6);
  const auto right = chain_window(12, 7, 11);
  const double sl = entanglement_entropy(symplectic_spectrum(left)).value;
  const double sr = entanglement_entropy(symplectic_spectrum(right)).value;
  CHECK(sl == doctest::Approx(sr).epsilon(1e-6));
}

TEST_CASE("Renyi entropy formula and limits") {
  Eigen::VectorXd one(1);
  one << 1.0;
  const auto half = renyi_entropy(spectrum_of(one), 0.5);
  CHECK(half.value == doctest::Approx(1.3169578969248172).epsilon(1e-12));
  CHECK(half.value > 0.0);

  Eigen::VectorXd flat(4);
  flat << 0.5, 0.5, 0.5, 0.5;
  CHECK(renyi_entropy(spectrum_of(flat), 0.5).value == 0.0);
  CHECK(renyi_entropy(spectrum_of(flat), 3.0).value == 0.0);

  CHECK_THROWS_AS(renyi_entropy(spectrum_of(one), 1.0), MisuseError);
  CHECK_THROWS_AS(renyi_entropy(spectrum_of(one), -0.5), MisuseError);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd xs(5);
    for (int i = 0; i < 5; ++i) xs(i) = u(rng);
    const double s1 = entanglement_entropy(spectrum_of(xs)).value;
    CHECK(renyi_entropy(spectrum_of(xs), 1.0 + 1e-4).value == doctest::Approx(s1).epsilon(1e-3));
    CHECK(renyi_entropy(spectrum_of(xs), 1.0 - 1e-4).value == doctest::Approx(s1).epsilon(1e-3));
    CHECK(renyi_entropy(spectrum_of(xs), 0.5).value >= 0.0);
    CHECK(renyi_entropy(spectrum_of(xs), 2.0).value >= 0.0);
  }
}

TEST_CASE("log negativity") {
  const auto corr = chain_window(8, 2, 5);
  Partition part;
  part.a1 = {Site{{2, 0, 0}}, Site{{3, 0, 0}}};
  part.a2 = {Site{{4, 0, 0}}, Site{{5, 0, 0}}};

  SUBCASE("matches the dense oracle") {
    const auto mv = log_negativity(corr, part);
    CHECK(mv.value == doctest::Approx(0.43272565540627617).epsilon(1e-8));
  }
  SUBCASE("empty transposed block gives zero") {
    Partition none;
    none.a1 = corr.window.sites;
    CHECK(log_negativity(corr, none).value == 0.0);
  }
  SUBCASE("swapping the blocks changes nothing") {
    const double e12 = log_negativity(corr, part).value;
    std::swap(part.a1, part.a2);
    const double e21 = log_negativity(corr, part).value;
    CHECK(e12 == doctest::Approx(e21).epsilon(1e-9));
  }
  SUBCASE("partition must cover the window") {
    Partition bad = part;
    bad.a2.pop_back();
    CHECK_THROWS_AS(log_negativity(corr, bad), DomainError);
    bad = part;
    bad.a2.push_back(Site{{6, 0, 0}});
    CHECK_THROWS_AS(log_negativity(corr, bad), DomainError);
  }
}

TEST_CASE("mutual information") {
  const auto corr = chain_window(8, 2, 5);
  Partition part;
  part.a1 = {Site{{2, 0, 0}}, Site{{3, 0, 0}}};
  part.a2 = {Site{{4, 0, 0}}, Site{{5, 0, 0}}};

  SUBCASE("order 1/2 matches the dense oracle") {
    const auto mv = mutual_information(corr, part, 0.5);
    CHECK(mv.value == doctest::Approx(0.8308390157499562).epsilon(1e-8));
  }
  SUBCASE("empty partner makes it vanish") {
    Partition none;
    none.a1 = corr.window.sites;
    CHECK(mutual_information(corr, none, 0.5).value == 0.0);
    CHECK(mutual_information(corr, none, 1.0).value == 0.0);
  }
  SUBCASE("order 1 is nonnegative") {
    CHECK(mutual_information(corr, part, 1.0).value >= -1e-9);
  }
  SUBCASE("three-window form agrees with the sliced form") {
    const auto a1 = chain_window(8, 2, 3);
    const auto a2 = chain_window(8, 4, 5);
    const auto direct = mutual_information(corr, a1, a2, 0.5);
    const auto sliced = mutual_information(corr, part, 0.5);
    CHECK(direct.value == doctest::Approx(sliced.value).epsilon(1e-12));
  }
  SUBCASE("mismatched lattices are rejected") {
    const auto other = chain_window(10, 2, 3);
    const auto a2 = chain_window(8, 4, 5);
    CHECK_THROWS_AS(mutual_information(corr, other, a2, 0.5), DomainError);
  }
}

TEST_CASE("untransposed spectra respect the uncertainty bound") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 25; ++rep) {
    const int L = 4 + static_cast<int>(rng() % 6);
    const int first = 1 + static_cast<int>(rng() % 2);
    const int last = std::min(L - 1, first + 1 + static_cast<int>(rng() % 4));
    const auto corr = chain_window(L, first, last);
    const auto sp = symplectic_spectrum(corr);
    CHECK(sp.values.minCoeff() >= 0.5 - 1e-9);
  }
}

TEST_CASE("full production pipeline equals the oracle on every contiguous split") {
  for (int L = 3; L <= 7; ++L) {
    const LatticeSpec spec{1, {L, 0, 0}, Bc::Fixed, 0.0, Sampling::IntegerK};
    const auto ref = oracle::correlators(spec);
    const int n = L - 1;
    for (int a = 1; a <= n; ++a) {
      for (int b = a; b <= n; ++b) {
        const auto corr = chain_window(L, a, b);
        std::vector<long> idx;
        for (int x = a; x <= b; ++x) idx.push_back(x - 1);
        const auto Xs = oracle::submatrix(ref.X, idx);
        const auto Ps = oracle::submatrix(ref.P, idx);
        const auto sp = symplectic_spectrum(corr);
        const double s_prod = entanglement_entropy(sp).value;
        CHECK(s_prod == doctest::Approx(oracle::entropy(oracle::spectrum(Xs, Ps))).epsilon(1e-8));
        for (int cut = a; cut < b; ++cut) {
          Partition part;
          std::vector<long> flip;
          for (int x = a; x <= b; ++x) {
            if (x <= cut) {
              part.a1.push_back(Site{{x, 0, 0}});
            } else {
              part.a2.push_back(Site{{x, 0, 0}});
              flip.push_back(x - a);
            }
          }
          const double e_prod = log_negativity(corr, part).value;
          const double e_ref = oracle::log_negativity(Xs, Ps, flip);
          CHECK(e_prod == doctest::Approx(e_ref).epsilon(1e-8));
        }
      }
    }
  }
}
