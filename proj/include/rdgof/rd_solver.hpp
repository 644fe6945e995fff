#pragma once

// Blahut-Arimoto alternating minimization for finite-alphabet
// rate-distortion problems.

#include <cstddef>
#include <optional>
#include <vector>

#include "rdgof/core.hpp"

namespace rdgof {

struct SolverConfig {
  double beta = 0.0;
  double tol = 1e-10;  // on the change of rate between iterations
  std::size_t max_iter = 100000;
  std::optional<std::size_t> reproduction_size;  // defaults to the source size
  bool record_objective = false;
};

struct SolverResult {
  DiscreteChannel channel;
  RDPoint point;
  std::vector<double> output_marginal;
  std::size_t iterations = 0;
  // rate + beta * distortion after every iteration, when requested.
  std::vector<double> objective;
};

// Thrown when the iteration budget runs out; carries the last iterate.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, SolverResult last)
      : NumericError(what), last_(std::move(last)) {}
  const SolverResult& last_iterate() const noexcept { return last_; }

 private:
  SolverResult last_;
};

// Fixed point of q(y) = sum_x p(x) W(y|x), W(y|x) ~ q(y) exp(-beta d(x,y)),
// started from the uniform output marginal. Reproduction symbols whose
// marginal drops below 1e-300 are pruned. Source symbols with p(x) = 0 do
// not take part and get a point mass on their cheapest reproduction symbol.
SolverResult blahut_arimoto(const DiscreteDistribution& source, const DistortionSpec& distortion,
                            const SolverConfig& config);

struct DistortionSolution {
  SolverResult result;
  double beta;
};

// Bisection over beta until |distortion - target_d0| < 1e-8. The bracket
// starts at [0, 1] and doubles its upper end until it brackets the target.
// RangeError when target_d0 is outside the achievable open interval.
DistortionSolution solve_for_distortion(const DiscreteDistribution& source,
                                        const DistortionSpec& distortion, double target_d0,
                                        const SolverConfig& config = {});

// Mutual information (nats) and expected distortion of (source, channel).
RDPoint evaluate_channel(const DiscreteDistribution& source, const DenseMatrix& channel,
                         const DenseMatrix& distortion, double beta);

}  // namespace rdgof
