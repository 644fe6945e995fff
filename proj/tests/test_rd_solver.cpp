#include <cmath>

#include "doctest.h"
#include "rdgof/kernels.hpp"
#include "rdgof/rd_solver.hpp"
#include "support.hpp"

using namespace rdgof;
using testing::binary_entropy;
using testing::TestRng;

namespace {

SolverResult solve_at(const DiscreteDistribution& p, const DistortionSpec& d, double beta) {
  SolverConfig c;
  c.beta = beta;
  return blahut_arimoto(p, d, c);
}

double row_total_variation(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace

TEST_CASE("lossless endpoint at large beta") {
  const auto r = solve_at(DiscreteDistribution::uniform(2), HammingDistortion{2}, 1e3);
  CHECK(r.point.rate == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(r.point.distortion < 1e-12);
  CHECK(r.channel.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(r.channel.matrix(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("zero slope gives zero rate") {
  const auto r = solve_at(DiscreteDistribution::uniform(2), HammingDistortion{2}, 0.0);
  CHECK(r.point.rate == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) CHECK(r.channel.matrix(x, y) == doctest::Approx(r.output_marginal[y]));
  }
}

TEST_CASE("binary rate-distortion function") {
  const auto p = DiscreteDistribution::uniform(2);
  const auto a = solve_for_distortion(p, HammingDistortion{2}, 0.25);
  CHECK(std::abs(a.result.point.rate - (std::log(2.0) - binary_entropy(0.25))) < 1e-6);
  CHECK(a.result.point.rate == doctest::Approx(0.1308).epsilon(1e-3));
  CHECK(std::abs(a.result.point.distortion - 0.25) < 1e-8);

  const auto b = solve_for_distortion(p, HammingDistortion{2}, 0.1);
  CHECK(std::abs(b.result.point.rate - (std::log(2.0) - binary_entropy(0.1))) < 1e-6);

  for (int k = 1; k <= 20; ++k) {
    const double d = 0.49 * k / 20.0;
    const auto s = solve_for_distortion(p, HammingDistortion{2}, d);
    CHECK(std::abs(s.result.point.rate - (std::log(2.0) - binary_entropy(d))) < 1e-6);
  }
}

TEST_CASE("biased binary source") {
  // R(D) = h(p) - h(D) for D < min(p, 1 - p).
  const DiscreteDistribution p({0.3, 0.7});
  for (double d : {0.02, 0.1, 0.2, 0.28}) {
    const auto s = solve_for_distortion(p, HammingDistortion{2}, d);
    CHECK(std::abs(s.result.point.rate - (binary_entropy(0.3) - binary_entropy(d))) < 1e-6);
  }
}

TEST_CASE("uniform source reproduces the hamming mixture") {
  const auto p = DiscreteDistribution::uniform(4);
  const auto s = solve_for_distortion(p, HammingDistortion{4}, 0.375);
  const auto expected = hamming_channel(HammingMixture(0.5, 4));
  for (std::size_t x = 0; x < 4; ++x) {
    CHECK(row_total_variation(s.result.channel.matrix.row(x), expected.matrix.row(x)) < 1e-6);
  }
}

TEST_CASE("uniform source channels stay in the mixture family") {
  TestRng rng(31);
  for (std::size_t l : {2u, 3u, 5u, 8u}) {
    for (int k = 0; k < 5; ++k) {
      const double beta = rng.uniform(0.1, 8.0);
      const auto r = solve_at(DiscreteDistribution::uniform(l), HammingDistortion{l}, beta);
      const auto& w = r.channel.matrix;
      const double diag = w(0, 0);
      const double off = l > 1 ? w(0, 1) : 0.0;
      for (std::size_t x = 0; x < l; ++x) {
        for (std::size_t y = 0; y < l; ++y) {
          CHECK(std::abs(w(x, y) - (x == y ? diag : off)) < 1e-6);
        }
      }
      // The matching mixture weight has the same expected distortion.
      const double alpha = diag - off;
      CHECK(hamming_distortion_of_alpha(alpha, l) == doctest::Approx(r.point.distortion).epsilon(1e-6));
    }
  }
}

TEST_CASE("rate and distortion are monotone in beta") {
  TestRng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t l = 2 + rng.index(5);
    const auto p = testing::random_distribution(rng, l);
    std::vector<std::vector<double>> rows(l, std::vector<double>(l));
    for (std::size_t x = 0; x < l; ++x) {
      for (std::size_t y = 0; y < l; ++y) rows[x][y] = x == y ? 0.0 : rng.uniform(0.2, 2.0);
    }
    const DistortionMatrix d(DenseMatrix::from_rows(rows));
    double prev_rate = -1.0;
    double prev_dist = 1e300;
    for (double beta = 0.0; beta <= 20.0; beta += 0.5) {
      const auto r = solve_at(p, d, beta);
      CHECK(r.point.rate >= prev_rate - 1e-9);
      CHECK(r.point.distortion <= prev_dist + 1e-9);
      CHECK(r.point.rate >= 0.0);
      prev_rate = r.point.rate;
      prev_dist = r.point.distortion;
    }
  }
}

TEST_CASE("every iteration decreases the Lagrangian") {
  TestRng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t l = 2 + rng.index(6);
    const auto p = testing::random_distribution(rng, l);
    std::vector<std::vector<double>> rows(l, std::vector<double>(l + 1));
    for (auto& row : rows) {
      for (auto& v : row) v = rng.uniform(0.0, 3.0);
    }
    SolverConfig c;
    c.beta = rng.uniform(0.1, 10.0);
    c.record_objective = true;
    const auto r = blahut_arimoto(p, DistortionMatrix(DenseMatrix::from_rows(rows)), c);
    REQUIRE(r.objective.size() == r.iterations);
    for (std::size_t i = 1; i < r.objective.size(); ++i) {
      CHECK(r.objective[i] <= r.objective[i - 1] + 1e-13 * std::abs(r.objective[i - 1]));
    }
  }
}

TEST_CASE("solver reports consistent points") {
  const DiscreteDistribution p({0.2, 0.5, 0.3});
  const auto r = solve_at(p, HammingDistortion{3}, 2.0);
  const auto again = evaluate_channel(p, r.channel.matrix, distortion_matrix(HammingDistortion{3}), 2.0);
  CHECK(again.rate == doctest::Approx(r.point.rate).epsilon(1e-12));
  CHECK(again.distortion == doctest::Approx(r.point.distortion).epsilon(1e-12));
  CHECK(r.point.beta == 2.0);
}

TEST_CASE("distortion targets outside the achievable range") {
  const auto p = DiscreteDistribution::uniform(2);
  CHECK_THROWS_AS(solve_for_distortion(p, HammingDistortion{2}, 0.0), RangeError);
  CHECK_THROWS_AS(solve_for_distortion(p, HammingDistortion{2}, 0.5), RangeError);
  CHECK_THROWS_AS(solve_for_distortion(p, HammingDistortion{2}, 0.7), RangeError);
  try {
    solve_for_distortion(p, HammingDistortion{2}, 0.6);
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("non-convergence carries the last iterate") {
  SolverConfig c;
  c.beta = 3.0;
  c.max_iter = 1;
  const DiscreteDistribution p({0.1, 0.6, 0.3});
  const DistortionMatrix d(DenseMatrix::from_rows({{0.0, 1.0, 4.0}, {1.0, 0.0, 1.0}, {4.0, 1.0, 0.0}}));
  try {
    blahut_arimoto(p, d, c);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().iterations == 1);
    CHECK(e.last_iterate().point.rate >= 0.0);
    CHECK(e.last_iterate().channel.matrix.rows() == 3);
  }
}

TEST_CASE("zero-probability source symbols") {
  const DiscreteDistribution p({0.5, 0.5, 0.0});
  const DistortionMatrix d(DenseMatrix::from_rows({{0.0, 1.0, 2.0}, {1.0, 0.0, 2.0}, {3.0, 0.5, 1.0}}));
  const auto r = solve_at(p, d, 2.0);
  // Row 2 is a point mass on its cheapest reproduction symbol.
  CHECK(r.channel.matrix(2, 1) == 1.0);
  CHECK(r.channel.matrix(2, 0) == 0.0);
  const auto ref = solve_at(DiscreteDistribution({0.5, 0.5}),
                            DistortionMatrix(DenseMatrix::from_rows({{0.0, 1.0, 2.0}, {1.0, 0.0, 2.0}})), 2.0);
  CHECK(r.point.rate == doctest::Approx(ref.point.rate).epsilon(1e-12));
}

TEST_CASE("rectangular reproduction alphabets") {
  // A third reproduction symbol at distortion 0.5 from both inputs.
  const DistortionMatrix d(DenseMatrix::from_rows({{0.0, 1.0, 0.5}, {1.0, 0.0, 0.5}}));
  const auto r = solve_at(DiscreteDistribution::uniform(2), d, 1.0);
  CHECK(r.channel.matrix.cols() == 3);
  CHECK(r.point.rate >= 0.0);
  SolverConfig c;
  c.reproduction_size = 2;
  CHECK_THROWS_AS(blahut_arimoto(DiscreteDistribution::uniform(2), d, c), InputError);
}
