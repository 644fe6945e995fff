#pragma once

// Monte Carlo calibration of the statistics: null distributions, critical
// values and p-values, power, consistency along a distortion schedule,
// exact Bahadur slopes for binary data and normality diagnostics for the
// simulated null law.
//
// Replication r always draws from Rng::for_replication(seed, r), so results
// do not depend on how replications are spread over threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdgof/core.hpp"
#include "rdgof/sampling.hpp"
#include "rdgof/statistics.hpp"

namespace rdgof {

// ---- statistic descriptors ------------------------------------------------

// Hamming rate-distortion statistic against the uniform null.
struct HammingStatistic {
  double alpha;
};
// D(Emp_n || U).
struct LikelihoodRatioStatistic {};
struct GaussianStatistic {
  double alpha;
  QuadratureConfig quad;
};
struct CircularStatistic {
  double kappa;
  QuadratureConfig quad;
};
// Squared norm of the mean resultant vector.
struct RayleighStatistic {};
// ln k - H(quantile-binned sample) with k equiprobable normal bins.
struct BinnedNormalStatistic {
  std::size_t bins;
};

using StatisticSpec = std::variant<HammingStatistic, LikelihoodRatioStatistic, GaussianStatistic,
                                   CircularStatistic, RayleighStatistic, BinnedNormalStatistic>;

// InputError when the sample kind does not fit the statistic.
double evaluate_statistic(const StatisticSpec& statistic, const EmpiricalSample& sample);

std::string describe(const StatisticSpec& statistic);

// ---- simulation -----------------------------------------------------------

// Runs fn(r) for r in [0, count) on `threads` workers (0 = hardware
// concurrency). An exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

// R statistic values on fresh iid n-samples from `model`.
std::vector<double> simulate_statistic(const SamplingModel& model, const StatisticSpec& statistic,
                                       std::size_t n, std::size_t replications,
                                       std::uint64_t seed, std::size_t threads = 0);

std::vector<double> simulate_null(const NullModel& model, const StatisticSpec& statistic,
                                  std::size_t n, std::size_t replications, std::uint64_t seed,
                                  std::size_t threads = 0);

struct CalibrationResult {
  std::vector<double> null_samples;
  double critical_value = 0.0;
  double significance = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
};

// The ceil((1 - significance) R)-th order statistic; no interpolation.
double critical_value(std::span<const double> null_samples, double significance);

// (1 + #{s >= observed}) / (R + 1).
double p_value(double observed, std::span<const double> null_samples);

CalibrationResult calibrate(const NullModel& model, const StatisticSpec& statistic, std::size_t n,
                            std::size_t replications, double significance, std::uint64_t seed,
                            std::size_t threads = 0);

struct PowerEstimate {
  double power = 0.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
};

// Fraction of replications under `alternative` with statistic >= K_n.
PowerEstimate power_estimate(const StatisticSpec& statistic, double critical,
                             const SamplingModel& alternative, std::size_t n,
                             std::size_t replications, std::uint64_t seed,
                             std::size_t threads = 0);

// ---- consistency along a schedule -----------------------------------------

using StatisticSchedule = std::function<StatisticSpec(std::size_t n)>;

// Hamming statistic with d_n = scale * n^(-exponent), clamped to the
// largest distortion (l-1)/l.
StatisticSchedule hamming_distortion_schedule(std::size_t l, double exponent, double scale = 1.0);

StatisticSchedule fixed_schedule(StatisticSpec statistic);

struct ConsistencyRow {
  std::size_t n = 0;
  std::string statistic;
  double median = 0.0;
  double p05 = 0.0;
  double median_se = 0.0;  // bootstrap standard error of the median
};

std::vector<ConsistencyRow> consistency_check(const SamplingModel& model,
                                              const StatisticSchedule& schedule,
                                              std::span<const std::size_t> n_grid,
                                              std::size_t replications, std::uint64_t seed,
                                              std::size_t threads = 0);

struct MonotoneCheck {
  std::vector<double> isotonic_fit;  // best non-increasing fit to the medians
  double residual = 0.0;             // max |median - fit|
  double noise = 0.0;                // max bootstrap standard error
  bool passed = false;               // residual <= 2 * noise
};

MonotoneCheck check_null_monotone(std::span<const ConsistencyRow> rows);

struct LowerBoundCheck {
  double p05 = 0.0;
  double bound = 0.0;
  bool passed = false;
};

// 5th percentile at the largest n against target - epsilon.
LowerBoundCheck check_alternative_bound(std::span<const ConsistencyRow> rows, double target,
                                        double epsilon);

// ---- Bahadur slopes -------------------------------------------------------

// Smoothing schedule for the circular test: k_n = ceil(n^gamma) bins and
// kappa_n = n^kappa_exponent. Construction requires gamma in (0, 1),
// eta in [1, 3) and kappa_exponent < eta, so kappa_n / n^eta -> 0.
class BahadurSchedule {
 public:
  BahadurSchedule(double gamma, double eta, double kappa_exponent);

  std::size_t bins(std::size_t n) const;
  double kappa(std::size_t n) const;
  // kappa_n |1 - cos(2 pi / k_n)| / n; tends to 0 exactly when
  // kappa_exponent < 1 + 2 gamma.
  double discretization_gap(std::size_t n) const;
  bool gap_vanishes() const { return kappa_exponent_ < 1.0 + 2.0 * gamma_; }

  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double kappa_exponent() const { return kappa_exponent_; }

 private:
  double gamma_;
  double eta_;
  double kappa_exponent_;
};

struct SlopeRow {
  std::size_t n = 0;
  double alpha = 1.0;
  double threshold = 0.0;
  double log_probability = 0.0;  // ln Pr_U(statistic >= threshold)
  double slope = 0.0;            // -(1/n) ln Pr
  bool unreachable = false;      // threshold above every attainable value
};

// Exact null tail probability of the binary Hamming statistic at
// smoothing alpha, by enumerating the Binomial(n, 1/2) outcomes.
double exact_log_tail_probability(std::size_t n, double alpha, double threshold);

// Slopes -(1/n) ln Pr_U(T_n >= K_n) with T_n the binary Hamming statistic at
// alpha_of_n(n) and K_n = threshold_of_n(n). n must not exceed 2000.
std::vector<SlopeRow> bahadur_slope_exact(std::span<const std::size_t> n_grid,
                                          const std::function<double(std::size_t)>& alpha_of_n,
                                          const std::function<double(std::size_t)>& threshold_of_n);

// The almost-sure limit of the statistic under `alternative`,
// D(Psi_alpha(P) || U); a threshold rule converging to D(P || U) as alpha -> 1.
double alternative_limit_threshold(const DiscreteDistribution& alternative, double alpha);

// ---- normality diagnostics ------------------------------------------------

struct GaussianityDiagnostics {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double qq_correlation = 0.0;  // against Blom normal scores
  bool degenerate = false;      // zero variance; moments are NaN
};

// Needs at least 100 values.
GaussianityDiagnostics gaussianity_diagnostics(std::span<const double> samples);

}  // namespace rdgof
