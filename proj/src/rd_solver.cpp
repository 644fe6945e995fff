#include "rdgof/rd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rdgof/numeric.hpp"

namespace rdgof {

namespace {

constexpr double kPruneThreshold = 1e-300;
constexpr double kDistortionTolerance = 1e-8;

double neg_inf() { return -std::numeric_limits<double>::infinity(); }

}  // namespace

RDPoint evaluate_channel(const DiscreteDistribution& source, const DenseMatrix& channel,
                         const DenseMatrix& distortion, double beta) {
  const std::size_t l = channel.rows();
  const std::size_t m = channel.cols();
  std::vector<double> marginal(m, 0.0);
  for (std::size_t x = 0; x < l; ++x) {
    if (source[x] == 0.0) continue;
    for (std::size_t y = 0; y < m; ++y) marginal[y] += source[x] * channel(x, y);
  }
  CompensatedSum rate;
  CompensatedSum dist;
  for (std::size_t x = 0; x < l; ++x) {
    const double px = source[x];
    if (px == 0.0) continue;
    for (std::size_t y = 0; y < m; ++y) {
      const double w = channel(x, y);
      if (w == 0.0) continue;
      rate.add(px * w * std::log(w / marginal[y]));
      dist.add(px * w * distortion(x, y));
    }
  }
  return {std::max(rate.value(), 0.0), std::max(dist.value(), 0.0), beta};
}

SolverResult blahut_arimoto(const DiscreteDistribution& source, const DistortionSpec& distortion,
                            const SolverConfig& config) {
  const DenseMatrix d = distortion_matrix(distortion);
  const std::size_t l = source.size();
  const std::size_t m = d.cols();
  if (d.rows() != l) {
    throw InputError("distortion matrix has " + std::to_string(d.rows()) +
                     " rows but the source has " + std::to_string(l) + " symbols");
  }
  if (config.reproduction_size && *config.reproduction_size != m) {
    throw InputError("reproduction alphabet size does not match the distortion matrix");
  }
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta)) {
    throw RangeError("beta must be finite and >= 0");
  }
  if (!(config.tol > 0.0)) throw InputError("tolerance must be positive");
  if (config.max_iter == 0) throw InputError("max_iter must be at least 1");

  const double beta = config.beta;
  std::vector<std::size_t> active;
  for (std::size_t x = 0; x < l; ++x) {
    if (source[x] > 0.0) active.push_back(x);
  }

  std::vector<double> q(m, 1.0 / static_cast<double>(m));
  DenseMatrix w(l, m, 0.0);
  std::vector<double> exponent(m);
  std::vector<double> next(m);
  SolverResult result{DiscreteChannel(DenseMatrix(1, 1, 1.0)), {}, {}, 0, {}};
  double previous_rate = std::numeric_limits<double>::quiet_NaN();

  // Fills the rows of source symbols that never take part.
  auto finish = [&](RDPoint point, std::size_t iterations) {
    DenseMatrix channel = w;
    for (std::size_t x = 0; x < l; ++x) {
      if (source[x] > 0.0) continue;
      std::size_t best = m;
      for (std::size_t y = 0; y < m; ++y) {
        if (q[y] == 0.0) continue;
        if (best == m || d(x, y) < d(x, best)) best = y;
      }
      for (std::size_t y = 0; y < m; ++y) channel(x, y) = (y == best) ? 1.0 : 0.0;
    }
    result.channel = DiscreteChannel(std::move(channel));
    result.point = point;
    result.output_marginal = q;
    result.iterations = iterations;
  };

  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    for (std::size_t x : active) {
      for (std::size_t y = 0; y < m; ++y) {
        exponent[y] = q[y] > 0.0 ? std::log(q[y]) - beta * d(x, y) : neg_inf();
      }
      const double norm = log_sum_exp(exponent);
      double row_total = 0.0;
      for (std::size_t y = 0; y < m; ++y) {
        w(x, y) = q[y] > 0.0 ? std::exp(exponent[y] - norm) : 0.0;
        row_total += w(x, y);
      }
      for (std::size_t y = 0; y < m; ++y) w(x, y) /= row_total;
    }

    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t x : active) {
      for (std::size_t y = 0; y < m; ++y) next[y] += source[x] * w(x, y);
    }
    double total = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
      if (next[y] < kPruneThreshold) next[y] = 0.0;
      total += next[y];
    }
    for (std::size_t y = 0; y < m; ++y) next[y] /= total;
    // Keep W consistent with the pruned support.
    for (std::size_t x : active) {
      double row_total = 0.0;
      for (std::size_t y = 0; y < m; ++y) {
        if (next[y] == 0.0) w(x, y) = 0.0;
        row_total += w(x, y);
      }
      if (row_total != 1.0) {
        for (std::size_t y = 0; y < m; ++y) w(x, y) /= row_total;
      }
    }
    q = next;

    const RDPoint point = evaluate_channel(source, w, d, beta);
    if (config.record_objective) result.objective.push_back(point.rate + beta * point.distortion);

    if (std::abs(point.rate - previous_rate) < config.tol) {
      finish(point, it);
      return result;
    }
    previous_rate = point.rate;
    if (it == config.max_iter) {
      finish(point, it);
      std::ostringstream os;
      os.precision(17);
      os << "Blahut-Arimoto did not converge within " << config.max_iter
         << " iterations at beta=" << beta << " (last rate " << point.rate << ", distortion "
         << point.distortion << ")";
      throw ConvergenceError(os.str(), std::move(result));
    }
  }
  throw NumericError("unreachable");
}

DistortionSolution solve_for_distortion(const DiscreteDistribution& source,
                                        const DistortionSpec& distortion, double target_d0,
                                        const SolverConfig& config) {
  const DenseMatrix d = distortion_matrix(distortion);
  if (d.rows() != source.size()) throw InputError("distortion matrix does not match the source");

  auto solve = [&](double beta) {
    SolverConfig c = config;
    c.beta = beta;
    c.record_objective = false;
    return blahut_arimoto(source, distortion, c);
  };

  SolverResult at_zero = solve(0.0);
  const double d_max = at_zero.point.distortion;
  double d_min = 0.0;
  for (std::size_t x = 0; x < d.rows(); ++x) {
    if (source[x] == 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < d.cols(); ++y) best = std::min(best, d(x, y));
    d_min += source[x] * best;
  }
  if (!(target_d0 > d_min && target_d0 < d_max)) {
    std::ostringstream os;
    os.precision(17);
    os << "target distortion " << target_d0 << " is outside the achievable interval (" << d_min
       << ", " << d_max << ")";
    throw RangeError(os.str());
  }

  double lo = 0.0;
  double hi = 1.0;
  SolverResult upper = solve(hi);
  for (int grow = 0; upper.point.distortion > target_d0; ++grow) {
    if (grow > 1100) throw NumericError("could not bracket the target distortion");
    lo = hi;
    hi *= 2.0;
    upper = solve(hi);
  }
  if (std::abs(upper.point.distortion - target_d0) < kDistortionTolerance) {
    return {std::move(upper), hi};
  }

  SolverResult best = upper;
  double best_beta = hi;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    SolverResult s = solve(mid);
    const double gap = s.point.distortion - target_d0;
    if (std::abs(gap) < std::abs(best.point.distortion - target_d0)) {
      best = s;
      best_beta = mid;
    }
    if (std::abs(gap) < kDistortionTolerance) return {std::move(s), mid};
    if (gap > 0.0) lo = mid;
    else hi = mid;
  }
  if (std::abs(best.point.distortion - target_d0) >= 1e-6) {
    throw NumericError("bisection over beta stalled before reaching the target distortion");
  }
  return {std::move(best), best_beta};
}

}  // namespace rdgof
