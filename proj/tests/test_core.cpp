#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "rdgof/core.hpp"
#include "support.hpp"

using namespace rdgof;
using testing::TestRng;

TEST_CASE("distribution validation") {
  CHECK_NOTHROW(DiscreteDistribution({0.5, 0.5}));
  CHECK_NOTHROW(DiscreteDistribution({0.5, 0.5 + 5e-13}));
  CHECK_THROWS_AS(DiscreteDistribution({0.5, 0.5 + 1e-11}), InputError);
  CHECK_THROWS_AS(DiscreteDistribution({1.5, -0.5}), InputError);
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<double>{}), InputError);
  CHECK_THROWS_AS(DiscreteDistribution({std::nan(""), 1.0}), InputError);

  const auto u = DiscreteDistribution::uniform(4);
  CHECK(u.size() == 4);
  CHECK(u.is_uniform());
  for (double p : u.probs()) CHECK(p == 0.25);
  CHECK_FALSE(DiscreteDistribution({0.75, 0.25}).is_uniform());
}

TEST_CASE("empirical distribution by counting") {
  const auto a = empirical_distribution(std::vector<std::size_t>{0, 0, 1}, 2);
  CHECK(a[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto b = empirical_distribution(std::vector<std::size_t>{0, 1, 2, 3}, 4);
  CHECK(b == DiscreteDistribution::uniform(4));

  const auto c = empirical_distribution(std::vector<std::size_t>{1, 1, 1}, 2);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 1.0);

  CHECK_THROWS_AS(empirical_distribution(std::vector<std::size_t>{0, 2}, 2), InputError);
  const auto sample = EmpiricalSample::categorical({0, 0, 1}, 2);
  CHECK(empirical_distribution(sample, 2) == a);
}

TEST_CASE("empirical samples keep their invariants") {
  CHECK_THROWS_AS(EmpiricalSample::categorical({0, 3}, 3), InputError);
  CHECK_THROWS_AS(EmpiricalSample::categorical({}, 3), InputError);
  CHECK_THROWS_AS(EmpiricalSample::real({}), InputError);

  const auto s = EmpiricalSample::circular({-0.5, 7.0, 2.0 * testing::kPi});
  REQUIRE(s.as_circular() != nullptr);
  for (double a : s.as_circular()->angles) {
    CHECK(a >= 0.0);
    CHECK(a < 2.0 * testing::kPi);
  }
  CHECK(s.as_circular()->angles[0] == doctest::Approx(2.0 * testing::kPi - 0.5));
  CHECK(s.as_circular()->angles[1] == doctest::Approx(7.0 - 2.0 * testing::kPi));
  CHECK(s.as_circular()->angles[2] == 0.0);
  CHECK(s.size() == 3);
  CHECK(s.as_real() == nullptr);
  CHECK(wrap_angle(-1e-20) < 2.0 * testing::kPi);
}

TEST_CASE("divergence examples") {
  const auto half = DiscreteDistribution::uniform(2);
  const DiscreteDistribution point({1.0, 0.0});
  CHECK(divergence_discrete(half, half) == 0.0);
  CHECK(divergence_discrete(point, half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(divergence_discrete(half, point) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(divergence_discrete(half, DiscreteDistribution::uniform(3)), InputError);
}

TEST_CASE("pearson chi-square examples") {
  const auto half = DiscreteDistribution::uniform(2);
  CHECK(pearson_chi2(half, half) == 0.0);
  CHECK(pearson_chi2(DiscreteDistribution({1.0, 0.0}), half) == doctest::Approx(1.0));
  CHECK(pearson_chi2(DiscreteDistribution({0.75, 0.25}), half) == doctest::Approx(0.25));
  CHECK_THROWS_AS(pearson_chi2(half, DiscreteDistribution({1.0, 0.0})), InputError);
}

TEST_CASE("divergence is nonnegative and vanishes only on equality") {
  TestRng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t l = 2 + rng.index(15);
    const auto p = testing::random_distribution(rng, l, trial % 2 == 0);
    const auto q = testing::random_distribution(rng, l);
    const double d = divergence_discrete(p, q);
    CHECK(d >= 0.0);
    if (p == q) {
      CHECK(d == 0.0);
    } else {
      CHECK(d > 0.0);
    }
    CHECK(divergence_discrete(q, q) == 0.0);
  }
}

TEST_CASE("divergence is invariant under a common permutation") {
  TestRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t l = 2 + rng.index(10);
    const auto p = testing::random_distribution(rng, l, false);
    const auto q = testing::random_distribution(rng, l);
    std::vector<std::size_t> perm(l);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = l - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    std::vector<double> pp(l), qq(l);
    for (std::size_t i = 0; i < l; ++i) {
      pp[i] = p[perm[i]];
      qq[i] = q[perm[i]];
    }
    CHECK(divergence_discrete(DiscreteDistribution(pp), DiscreteDistribution(qq)) ==
          doctest::Approx(divergence_discrete(p, q)).epsilon(1e-13));
  }
}

TEST_CASE("second-order link between divergence and chi-square") {
  TestRng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t l = 2 + rng.index(10);
    const auto p = testing::random_distribution(rng, l);
    const auto q = testing::random_distribution(rng, l, true, 0.2);
    auto along = [&](double t) {
      std::vector<double> m(l);
      for (std::size_t i = 0; i < l; ++i) m[i] = q[i] + t * (p[i] - q[i]);
      // Re-normalize the rounding residue only.
      double s = 0.0;
      for (double v : m) s += v;
      m[0] += 1.0 - s;
      return divergence_discrete(DiscreteDistribution(m), q) / (t * t);
    };
    // Richardson step removes the linear term in t.
    const double extrapolated = 2.0 * along(5e-4) - along(1e-3);
    CHECK(testing::relative_error(extrapolated, 0.5 * pearson_chi2(p, q)) < 1e-4);
  }
}

TEST_CASE("kernel parameter validation") {
  CHECK_NOTHROW(HammingMixture(0.0, 3));
  CHECK_NOTHROW(HammingMixture(1.0, 3));
  CHECK_THROWS_AS(HammingMixture(1.1, 3), RangeError);
  CHECK_THROWS_AS(HammingMixture(-0.1, 3), RangeError);
  CHECK_THROWS_AS(HammingMixture(0.5, 0), InputError);
  CHECK_NOTHROW(GaussianChannel(0.0));
  CHECK_THROWS_AS(GaussianChannel(1.0), RangeError);
  CHECK_NOTHROW(VonMisesSmoother(0.0));
  CHECK_THROWS_AS(VonMisesSmoother(-1.0), RangeError);
  CHECK_THROWS_AS(DiscreteChannel(DenseMatrix::from_rows({{0.5, 0.6}, {0.5, 0.5}})), InputError);
  CHECK_NOTHROW(DiscreteChannel(DenseMatrix::from_rows({{0.5, 0.5}, {1.0, 0.0}})));
  CHECK(describe(SmoothingKernel{HammingMixture(0.5, 4)}) == "hamming(alpha=0.5,l=4)");
}

TEST_CASE("distortion functions") {
  TestRng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-10.0, 10.0);
    const double b = rng.uniform(-10.0, 10.0);
    const double chord = squared_chord(a, b);
    CHECK(chord >= 0.0);
    CHECK(chord <= 4.0);
    CHECK(chord == doctest::Approx(2.0 - 2.0 * std::cos(b - a)).epsilon(1e-12).scale(1.0));
    CHECK(squared_euclidean(a, b) == doctest::Approx((a - b) * (a - b)));
  }
  CHECK(squared_chord(0.3, 0.3) == 0.0);
  CHECK(squared_chord(0.0, testing::kPi) == doctest::Approx(4.0));

  const auto h = distortion_matrix(HammingDistortion{3});
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 3; ++y) CHECK(h(x, y) == (x == y ? 0.0 : 1.0));
  }
  CHECK_THROWS_AS(distortion_matrix(SquaredChordCircle{}), InputError);
  CHECK_THROWS_AS(DistortionMatrix(DenseMatrix::from_rows({{0.0, -1.0}})), InputError);
}
