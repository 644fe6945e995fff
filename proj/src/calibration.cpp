#include "rdgof/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>
#include <type_traits>

#include "rdgof/numeric.hpp"

namespace rdgof {

namespace {

const CategoricalData& need_categorical(const EmpiricalSample& s, const char* what) {
  const auto* d = s.as_categorical();
  if (d == nullptr) throw InputError(std::string(what) + " needs categorical data");
  return *d;
}
const RealData& need_real(const EmpiricalSample& s, const char* what) {
  const auto* d = s.as_real();
  if (d == nullptr) throw InputError(std::string(what) + " needs real-valued data");
  return *d;
}
const CircularData& need_circular(const EmpiricalSample& s, const char* what) {
  const auto* d = s.as_circular();
  if (d == nullptr) throw InputError(std::string(what) + " needs circular data");
  return *d;
}

// Value at the given 1-based order statistic.
double order_statistic(std::vector<double> values, std::size_t rank) {
  auto it = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), it, values.end());
  return *it;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return (m % 2 == 1) ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

double percentile05(const std::vector<double>& values) {
  const auto rank = static_cast<std::size_t>(
      std::max(1.0, std::ceil(0.05 * static_cast<double>(values.size()))));
  return order_statistic(values, rank);
}

}  // namespace

double evaluate_statistic(const StatisticSpec& statistic, const EmpiricalSample& sample) {
  return std::visit(
      [&sample](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HammingStatistic>) {
          const auto& d = need_categorical(sample, "hamming statistic");
          return rd_statistic_hamming(empirical_distribution(d.labels, sample.alphabet_size()),
                                      s.alpha);
        } else if constexpr (std::is_same_v<T, LikelihoodRatioStatistic>) {
          const auto& d = need_categorical(sample, "likelihood ratio statistic");
          const std::size_t l = sample.alphabet_size();
          return lr_statistic(empirical_distribution(d.labels, l), DiscreteDistribution::uniform(l));
        } else if constexpr (std::is_same_v<T, GaussianStatistic>) {
          return rd_statistic_gaussian(need_real(sample, "gaussian statistic").values, s.alpha,
                                       s.quad);
        } else if constexpr (std::is_same_v<T, CircularStatistic>) {
          return rd_statistic_circular(need_circular(sample, "circular statistic").angles, s.kappa,
                                       s.quad);
        } else if constexpr (std::is_same_v<T, RayleighStatistic>) {
          return rayleigh_statistic(need_circular(sample, "rayleigh statistic").angles)
              .resultant_norm_sq;
        } else {
          const auto binned = quantile_bin(need_real(sample, "binned statistic").values,
                                           normal_quantile, s.bins);
          return lr_statistic(binned, DiscreteDistribution::uniform(s.bins));
        }
      },
      statistic);
}

std::string describe(const StatisticSpec& statistic) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HammingStatistic>) os << "rd-hamming(alpha=" << s.alpha << ")";
        else if constexpr (std::is_same_v<T, LikelihoodRatioStatistic>) os << "likelihood-ratio";
        else if constexpr (std::is_same_v<T, GaussianStatistic>) os << "rd-gaussian(alpha=" << s.alpha << ")";
        else if constexpr (std::is_same_v<T, CircularStatistic>) os << "rd-circular(kappa=" << s.kappa << ")";
        else if constexpr (std::is_same_v<T, RayleighStatistic>) os << "rayleigh";
        else os << "binned-normal(k=" << s.bins << ")";
      },
      statistic);
  return os.str();
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::size_t> error_index(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      // Strided assignment; each worker stops at its first failure.
      for (std::size_t i = t; i < count; i += threads) {
        try {
          fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
          error_index[t] = i;
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  std::size_t worst = threads;
  for (std::size_t t = 0; t < threads; ++t) {
    if (errors[t] && (worst == threads || error_index[t] < error_index[worst])) worst = t;
  }
  if (worst != threads) std::rethrow_exception(errors[worst]);
}

std::vector<double> simulate_statistic(const SamplingModel& model, const StatisticSpec& statistic,
                                       std::size_t n, std::size_t replications,
                                       std::uint64_t seed, std::size_t threads) {
  if (replications == 0) throw InputError("need at least one replication");
  if (n == 0) throw InputError("sample size must be positive");
  std::vector<double> out(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    Rng rng = Rng::for_replication(seed, r);
    try {
      out[r] = evaluate_statistic(statistic, draw_sample(model, n, rng));
    } catch (const InputError& e) {
      throw InputError("replication " + std::to_string(r) + ": " + e.what());
    } catch (const RangeError& e) {
      throw RangeError("replication " + std::to_string(r) + ": " + e.what());
    } catch (const Error& e) {
      throw NumericError("replication " + std::to_string(r) + ": " + e.what());
    }
  });
  return out;
}

std::vector<double> simulate_null(const NullModel& model, const StatisticSpec& statistic,
                                  std::size_t n, std::size_t replications, std::uint64_t seed,
                                  std::size_t threads) {
  return simulate_statistic(as_sampling_model(model), statistic, n, replications, seed, threads);
}

double critical_value(std::span<const double> null_samples, double significance) {
  if (null_samples.empty()) throw InputError("no null samples");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw RangeError("significance must lie in (0, 1)");
  }
  const double r = static_cast<double>(null_samples.size());
  // The 1e-9 guard keeps (1 - 0.05) * 100 from rounding up to rank 96.
  const double rank = std::ceil((1.0 - significance) * r - 1e-9);
  const auto k = static_cast<std::size_t>(std::clamp(rank, 1.0, r));
  return order_statistic({null_samples.begin(), null_samples.end()}, k);
}

double p_value(double observed, std::span<const double> null_samples) {
  if (null_samples.empty()) throw InputError("no null samples");
  std::size_t at_least = 0;
  for (double s : null_samples) {
    if (s >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(null_samples.size() + 1);
}

CalibrationResult calibrate(const NullModel& model, const StatisticSpec& statistic, std::size_t n,
                            std::size_t replications, double significance, std::uint64_t seed,
                            std::size_t threads) {
  CalibrationResult result;
  result.null_samples = simulate_null(model, statistic, n, replications, seed, threads);
  result.critical_value = critical_value(result.null_samples, significance);
  result.significance = significance;
  result.replications = replications;
  result.seed = seed;
  return result;
}

PowerEstimate power_estimate(const StatisticSpec& statistic, double critical,
                             const SamplingModel& alternative, std::size_t n,
                             std::size_t replications, std::uint64_t seed, std::size_t threads) {
  const auto values = simulate_statistic(alternative, statistic, n, replications, seed, threads);
  std::size_t hits = 0;
  for (double v : values) {
    if (v >= critical) ++hits;
  }
  PowerEstimate est;
  est.replications = replications;
  est.power = static_cast<double>(hits) / static_cast<double>(replications);
  est.standard_error = std::sqrt(est.power * (1.0 - est.power) / static_cast<double>(replications));
  return est;
}

StatisticSchedule hamming_distortion_schedule(std::size_t l, double exponent, double scale) {
  if (l < 2) throw InputError("schedule needs an alphabet of at least two symbols");
  if (!(exponent > 0.0) || !(scale > 0.0)) {
    throw RangeError("distortion schedule must decrease to zero");
  }
  return [l, exponent, scale](std::size_t n) -> StatisticSpec {
    const double ld = static_cast<double>(l);
    const double d_n = std::min(scale * std::pow(static_cast<double>(n), -exponent), (ld - 1.0) / ld);
    return HammingStatistic{hamming_alpha_from_distortion(d_n, l)};
  };
}

StatisticSchedule fixed_schedule(StatisticSpec statistic) {
  return [statistic = std::move(statistic)](std::size_t) { return statistic; };
}

std::vector<ConsistencyRow> consistency_check(const SamplingModel& model,
                                              const StatisticSchedule& schedule,
                                              std::span<const std::size_t> n_grid,
                                              std::size_t replications, std::uint64_t seed,
                                              std::size_t threads) {
  constexpr std::size_t kBootstrap = 200;
  std::vector<ConsistencyRow> rows;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t n = n_grid[g];
    const StatisticSpec statistic = schedule(n);
    const std::uint64_t row_seed = replication_seed(seed, 0x5eed0000ULL + g);
    auto values = simulate_statistic(model, statistic, n, replications, row_seed, threads);

    ConsistencyRow row;
    row.n = n;
    row.statistic = describe(statistic);
    row.median = median_of(values);
    row.p05 = percentile05(values);

    Rng boot(replication_seed(row_seed, 0xb007ULL));
    CompensatedSum sum;
    CompensatedSum sum_sq;
    std::vector<double> resample(values.size());
    for (std::size_t b = 0; b < kBootstrap; ++b) {
      for (auto& v : resample) v = values[boot.index(values.size())];
      const double m = median_of(resample);
      sum.add(m);
      sum_sq.add(m * m);
    }
    const double mean = sum.value() / kBootstrap;
    const double var = std::max(0.0, sum_sq.value() / kBootstrap - mean * mean);
    row.median_se = std::sqrt(var * kBootstrap / (kBootstrap - 1));
    rows.push_back(std::move(row));
  }
  return rows;
}

MonotoneCheck check_null_monotone(std::span<const ConsistencyRow> rows) {
  MonotoneCheck check;
  // Pool-adjacent-violators for a non-increasing fit with equal weights.
  struct Block {
    double sum;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (const auto& row : rows) {
    blocks.push_back({row.median, 1});
    while (blocks.size() > 1) {
      const Block& last = blocks.back();
      const Block& prev = blocks[blocks.size() - 2];
      if (prev.sum / prev.count >= last.sum / last.count) break;
      Block merged{prev.sum + last.sum, prev.count + last.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  for (const Block& b : blocks) {
    for (std::size_t i = 0; i < b.count; ++i) check.isotonic_fit.push_back(b.sum / b.count);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check.residual = std::max(check.residual, std::abs(rows[i].median - check.isotonic_fit[i]));
    check.noise = std::max(check.noise, rows[i].median_se);
  }
  check.passed = check.residual <= 2.0 * check.noise;
  return check;
}

LowerBoundCheck check_alternative_bound(std::span<const ConsistencyRow> rows, double target,
                                        double epsilon) {
  if (rows.empty()) throw InputError("empty consistency table");
  const auto largest = std::max_element(
      rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  LowerBoundCheck check;
  check.p05 = largest->p05;
  check.bound = target - epsilon;
  check.passed = check.p05 >= check.bound;
  return check;
}

BahadurSchedule::BahadurSchedule(double gamma, double eta, double kappa_exponent)
    : gamma_(gamma), eta_(eta), kappa_exponent_(kappa_exponent) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw RangeError("bin exponent gamma must lie in (0, 1)");
  if (!(eta >= 1.0 && eta < 3.0)) throw RangeError("growth cap eta must lie in [1, 3)");
  if (!(kappa_exponent < eta)) throw RangeError("kappa exponent must be below eta");
  if (!(kappa_exponent > 0.0)) throw RangeError("kappa_n must grow without bound");
}

std::size_t BahadurSchedule::bins(std::size_t n) const {
  return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), gamma_)));
}

double BahadurSchedule::kappa(std::size_t n) const {
  return std::pow(static_cast<double>(n), kappa_exponent_);
}

double BahadurSchedule::discretization_gap(std::size_t n) const {
  const double k = static_cast<double>(bins(n));
  const double s = std::sin(0.5 * kTwoPi / k);
  // 1 - cos(x) = 2 sin^2(x/2) without cancellation.
  return kappa(n) * 2.0 * s * s / static_cast<double>(n);
}

double exact_log_tail_probability(std::size_t n, double alpha, double threshold) {
  if (n == 0 || n > 2000) throw RangeError("exact enumeration supports 1 <= n <= 2000");
  const double nd = static_cast<double>(n);
  const double log_half_n = -nd * std::log(2.0);
  std::vector<double> terms;
  terms.reserve(n + 1);
  for (std::size_t c = 0; c <= n; ++c) {
    const DiscreteDistribution emp(
        {static_cast<double>(c) / nd, static_cast<double>(n - c) / nd});
    if (rd_statistic_hamming(emp, alpha) >= threshold) {
      terms.push_back(log_binomial(static_cast<unsigned>(n), static_cast<unsigned>(c)) + log_half_n);
    }
  }
  if (terms.size() == n + 1) return 0.0;
  return log_sum_exp(terms);
}

std::vector<SlopeRow> bahadur_slope_exact(std::span<const std::size_t> n_grid,
                                          const std::function<double(std::size_t)>& alpha_of_n,
                                          const std::function<double(std::size_t)>& threshold_of_n) {
  std::vector<SlopeRow> rows;
  for (std::size_t n : n_grid) {
    SlopeRow row;
    row.n = n;
    row.alpha = alpha_of_n(n);
    row.threshold = threshold_of_n(n);
    row.log_probability = exact_log_tail_probability(n, row.alpha, row.threshold);
    if (std::isinf(row.log_probability)) {
      row.unreachable = true;
      row.slope = std::numeric_limits<double>::infinity();
    } else {
      row.slope = row.log_probability == 0.0 ? 0.0 : -row.log_probability / static_cast<double>(n);
    }
    rows.push_back(row);
  }
  return rows;
}

double alternative_limit_threshold(const DiscreteDistribution& alternative, double alpha) {
  return rd_statistic_hamming(alternative, alpha);
}

GaussianityDiagnostics gaussianity_diagnostics(std::span<const double> samples) {
  if (samples.size() < 100) throw InputError("gaussianity diagnostics need at least 100 values");
  const double r = static_cast<double>(samples.size());
  const double mean = compensated_total(samples) / r;
  CompensatedSum m2, m3, m4;
  for (double x : samples) {
    const double d = x - mean;
    m2.add(d * d);
    m3.add(d * d * d);
    m4.add(d * d * d * d);
  }
  GaussianityDiagnostics out;
  const double var = m2.value() / r;
  if (!(var > 0.0)) {
    out.degenerate = true;
    out.skewness = out.excess_kurtosis = out.qq_correlation =
        std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.skewness = (m3.value() / r) / std::pow(var, 1.5);
  out.excess_kurtosis = (m4.value() / r) / (var * var) - 3.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> scores(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    scores[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (r + 0.25));
  }
  const double score_mean = compensated_total(scores) / r;
  CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double a = sorted[i] - mean;
    const double b = scores[i] - score_mean;
    sxy.add(a * b);
    sxx.add(a * a);
    syy.add(b * b);
  }
  out.qq_correlation = sxy.value() / std::sqrt(sxx.value() * syy.value());
  return out;
}

}  // namespace rdgof
