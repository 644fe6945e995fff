#include "rdgof/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rdgof/numeric.hpp"

namespace rdgof {

void QuadratureConfig::validate() const {
  if (grid_points < 16) throw InputError("quadrature needs at least 16 grid points");
  if (!(truncation_sigmas > 0.0) || !std::isfinite(truncation_sigmas)) {
    throw InputError("truncation width must be positive");
  }
}

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178032973640562;
constexpr double kIdentityTolerance = 1e-8;
// exp(-x^2/2) is exactly zero in double precision beyond this many sigmas.
constexpr double kUnderflowSigmas = 39.0;

struct Interval {
  double lo;
  double hi;
};

std::vector<Interval> merge_intervals(std::vector<Interval> ivs) {
  std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& iv : ivs) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

// Composite trapezoid rule over a union of intervals. The total node budget
// is shared in proportion to length, subject to a maximum step.
template <class F>
double integrate_union(std::vector<Interval> ivs, const QuadratureConfig& quad, double max_step,
                       F&& f) {
  const std::vector<Interval> merged = merge_intervals(std::move(ivs));
  double total_length = 0.0;
  for (const Interval& iv : merged) total_length += iv.hi - iv.lo;
  CompensatedSum acc;
  for (const Interval& iv : merged) {
    const double len = iv.hi - iv.lo;
    const double share = std::ceil(static_cast<double>(quad.grid_points) * len / total_length);
    const double by_step = std::ceil(len / max_step);
    const auto n = static_cast<std::size_t>(std::max({share, by_step, 16.0}));
    const double h = len / static_cast<double>(n);
    CompensatedSum s;
    for (std::size_t k = 0; k <= n; ++k) {
      const double x = (k == n) ? iv.hi : iv.lo + h * static_cast<double>(k);
      const double weight = (k == 0 || k == n) ? 0.5 : 1.0;
      s.add(weight * f(x));
    }
    acc.add(h * s.value());
  }
  return acc.value();
}

struct WeightedNormal {
  double weight;
  double mean;
  double sd;
};

// sqrt(2 pi) times the density of a weighted normal mixture. Components are
// kept sorted by mean so each evaluation only touches the ones that do not
// underflow.
class NormalMixture {
 public:
  explicit NormalMixture(std::vector<WeightedNormal> comps) : comps_(std::move(comps)) {
    std::stable_sort(comps_.begin(), comps_.end(),
                     [](const WeightedNormal& a, const WeightedNormal& b) { return a.mean < b.mean; });
    means_.reserve(comps_.size());
    for (const auto& c : comps_) {
      means_.push_back(c.mean);
      max_sd_ = std::max(max_sd_, c.sd);
      min_sd_ = std::min(min_sd_, c.sd);
    }
  }

  double scaled_density(double x) const {
    const double reach = kUnderflowSigmas * max_sd_;
    auto first = std::lower_bound(means_.begin(), means_.end(), x - reach);
    auto last = std::upper_bound(first, means_.end(), x + reach);
    double s = 0.0;
    for (auto it = first; it != last; ++it) {
      const auto& c = comps_[static_cast<std::size_t>(it - means_.begin())];
      const double z = (x - c.mean) / c.sd;
      s += c.weight * std::exp(-0.5 * z * z) / c.sd;
    }
    return s;
  }

  std::vector<Interval> windows(double sigmas) const {
    std::vector<Interval> ivs;
    ivs.reserve(comps_.size());
    for (const auto& c : comps_) ivs.push_back({c.mean - sigmas * c.sd, c.mean + sigmas * c.sd});
    return ivs;
  }

  const std::vector<WeightedNormal>& components() const { return comps_; }
  double min_sd() const { return min_sd_; }

 private:
  std::vector<WeightedNormal> comps_;
  std::vector<double> means_;
  double max_sd_ = 0.0;
  double min_sd_ = std::numeric_limits<double>::infinity();
};

double log_normal_density(double x, const NormalComponent& c) {
  const double z = (x - c.mean);
  return -0.5 * z * z / c.variance - 0.5 * std::log(c.variance) - kLogSqrtTwoPi;
}

double mixture_to_normal(const NormalMixture& mix, const NormalComponent& ref,
                         const QuadratureConfig& quad) {
  const double value =
      integrate_union(mix.windows(quad.truncation_sigmas), quad, 0.25 * mix.min_sd(), [&](double x) {
        const double s = mix.scaled_density(x);
        if (s == 0.0) return 0.0;
        const double log_m = std::log(s) - kLogSqrtTwoPi;
        return std::exp(log_m) * (log_m - log_normal_density(x, ref));
      });
  return std::max(value, 0.0);
}

void check_normal(const NormalComponent& c) {
  if (!(c.variance > 0.0) || !std::isfinite(c.variance) || !std::isfinite(c.mean)) {
    throw InputError("normal component needs a finite mean and a positive variance");
  }
}

// Distinct sorted values with their relative multiplicities.
std::vector<std::pair<double, double>> merge_duplicates(std::span<const double> xs) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  const double unit = 1.0 / static_cast<double>(sorted.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.emplace_back(sorted[i], static_cast<double>(j - i) * unit);
    i = j;
  }
  return out;
}

// 2 pi times a weighted von Mises mixture density, evaluated on the
// periodic grid.
struct WeightedVonMises {
  double weight;
  double cos_center;
  double sin_center;
  double kappa;
  double inv_scaled_i0;  // 1 / (exp(-kappa) I0(kappa))
};

class VonMisesMixture {
 public:
  explicit VonMisesMixture(std::vector<WeightedVonMises> comps) : comps_(std::move(comps)) {}

  static WeightedVonMises make(double weight, double center, double kappa) {
    return {weight, std::cos(center), std::sin(center), kappa, 1.0 / bessel_i0_scaled(kappa)};
  }

  double scaled_density(double cos_t, double sin_t) const {
    double s = 0.0;
    for (const auto& c : comps_) s += c.weight * component(c, cos_t, sin_t);
    return s;
  }

  static double component(const WeightedVonMises& c, double cos_t, double sin_t) {
    if (c.kappa == 0.0) return 1.0;
    const double cos_diff = cos_t * c.cos_center + sin_t * c.sin_center;
    return std::exp(c.kappa * (cos_diff - 1.0)) * c.inv_scaled_i0;
  }

 private:
  std::vector<WeightedVonMises> comps_;
};

// Node count of the periodic rule: at least four nodes per circular
// standard deviation 1/sqrt(kappa).
std::size_t periodic_nodes(const QuadratureConfig& quad, double max_kappa) {
  const double by_width = std::ceil(4.0 * kTwoPi * std::sqrt(max_kappa));
  return std::max(quad.grid_points, static_cast<std::size_t>(by_width));
}

// Mean over the periodic grid of f(cos theta, sin theta).
template <class F>
double periodic_mean(std::size_t nodes, F&& f) {
  CompensatedSum s;
  const double step = kTwoPi / static_cast<double>(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double t = step * static_cast<double>(j);
    s.add(f(std::cos(t), std::sin(t)));
  }
  return s.value() / static_cast<double>(nodes);
}

// v ln(v / r) - v + r: nonnegative, and its integral is the divergence when
// both v and r are densities relative to the same measure.
double bregman_term(double v, double r) {
  if (v == 0.0) return r;
  return v * std::log(v / r) - v + r;
}

void check_identity(const MixtureDecomposition& d) {
  if (!std::isfinite(d.avg_component_to_ref)) return;
  const double scale = std::max(1.0, std::abs(d.avg_component_to_ref));
  if (!(d.residual <= kIdentityTolerance * scale)) {
    std::ostringstream os;
    os.precision(17);
    os << "compensation identity violated by " << d.residual << " (quadrature failure)";
    throw NumericError(os.str());
  }
}

void finish_residual(MixtureDecomposition& d) {
  d.residual = std::abs(d.mixture_to_ref - (d.avg_component_to_ref - d.avg_component_to_mixture));
  if (!std::isfinite(d.avg_component_to_ref)) d.residual = 0.0;
  check_identity(d);
}

}  // namespace

double rd_statistic_hamming(const DiscreteDistribution& emp, const DiscreteDistribution& null,
                            double alpha) {
  const HammingMixture kernel(alpha, emp.size());
  if (null.size() != emp.size()) throw InputError("alphabet sizes differ");
  return divergence_discrete(apply_hamming(kernel, emp), apply_hamming(kernel, null));
}

double rd_statistic_hamming(const DiscreteDistribution& emp, double alpha) {
  return rd_statistic_hamming(emp, DiscreteDistribution::uniform(emp.size()), alpha);
}

double rd_statistic_channel(const DiscreteDistribution& emp, const DiscreteDistribution& null,
                            const DiscreteChannel& channel) {
  return divergence_discrete(apply_channel(channel, emp), apply_channel(channel, null));
}

double rd_statistic_gaussian(std::span<const double> xs, double alpha,
                             const QuadratureConfig& quad) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw RangeError("alpha must be < 1 for the normal test (and >= 0)");
  }
  if (xs.empty()) throw InputError("sample is empty");
  quad.validate();
  if (alpha == 0.0) return 0.0;
  const double sd = std::sqrt(1.0 - alpha * alpha);
  std::vector<WeightedNormal> comps;
  for (const auto& [x, w] : merge_duplicates(xs)) comps.push_back({w, alpha * x, sd});
  return mixture_to_normal(NormalMixture(std::move(comps)), {0.0, 1.0}, quad);
}

double rd_statistic_circular(std::span<const double> angles, double kappa,
                             const QuadratureConfig& quad) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw RangeError("kappa must be >= 0");
  if (angles.empty()) throw InputError("sample is empty");
  quad.validate();
  if (kappa == 0.0) return 0.0;
  std::vector<WeightedVonMises> comps;
  for (const auto& [theta, w] : merge_duplicates(angles)) {
    comps.push_back(VonMisesMixture::make(w, theta, kappa));
  }
  const VonMisesMixture mix(std::move(comps));
  const double value = periodic_mean(periodic_nodes(quad, kappa), [&](double c, double s) {
    return bregman_term(mix.scaled_density(c, s), 1.0);
  });
  return std::max(value, 0.0);
}

double lr_statistic(const DiscreteDistribution& emp, const DiscreteDistribution& p0) {
  return divergence_discrete(emp, p0);
}

double entropy_statistic(const DiscreteDistribution& binned) {
  double h = 0.0;
  for (double p : binned.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

CircularSummary rayleigh_statistic(std::span<const double> angles) {
  if (angles.empty()) throw InputError("sample is empty");
  CompensatedSum c;
  CompensatedSum s;
  for (double t : angles) {
    c.add(std::cos(t));
    s.add(std::sin(t));
  }
  const double n = static_cast<double>(angles.size());
  CircularSummary out;
  out.mean_cos = c.value() / n;
  out.mean_sin = s.value() / n;
  out.resultant_norm_sq =
      std::min(1.0, out.mean_cos * out.mean_cos + out.mean_sin * out.mean_sin);
  return out;
}

double second_moment(std::span<const double> xs) {
  if (xs.empty()) throw InputError("sample is empty");
  CompensatedSum s;
  for (double x : xs) s.add(x * x);
  return s.value() / static_cast<double>(xs.size());
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw InputError("sample is empty");
  return compensated_total(xs) / static_cast<double>(xs.size());
}

DiscreteDistribution quantile_bin(std::span<const double> xs,
                                  const std::function<double(double)>& inverse_cdf,
                                  std::size_t k) {
  if (k < 2) throw InputError("quantile binning needs k >= 2");
  if (xs.empty()) throw InputError("sample is empty");
  std::vector<double> edges(k - 1);
  for (std::size_t j = 1; j < k; ++j) {
    edges[j - 1] = inverse_cdf(static_cast<double>(j) / static_cast<double>(k));
  }
  std::vector<std::size_t> counts(k, 0);
  for (double x : xs) {
    const auto bin = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) -
                                              edges.begin());
    ++counts[bin];
  }
  std::vector<double> probs(k);
  const double n = static_cast<double>(xs.size());
  for (std::size_t j = 0; j < k; ++j) probs[j] = static_cast<double>(counts[j]) / n;
  return DiscreteDistribution(std::move(probs));
}

double normal_divergence(const NormalComponent& p, const NormalComponent& q) {
  check_normal(p);
  check_normal(q);
  const double dm = p.mean - q.mean;
  return 0.5 * (std::log(q.variance / p.variance) + (p.variance + dm * dm) / q.variance - 1.0);
}

double vonmises_divergence(const VonMisesComponent& p, const VonMisesComponent& q) {
  const double a = bessel_i1_over_i0(p.kappa);
  return p.kappa * a - q.kappa * a * std::cos(p.center - q.center) - log_bessel_i0(p.kappa) +
         log_bessel_i0(q.kappa);
}

double normal_mixture_divergence(std::span<const NormalComponent> components,
                                 const NormalComponent& ref, const QuadratureConfig& quad) {
  if (components.empty()) throw InputError("mixture has no components");
  quad.validate();
  check_normal(ref);
  const double w = 1.0 / static_cast<double>(components.size());
  std::vector<WeightedNormal> comps;
  for (const auto& c : components) {
    check_normal(c);
    comps.push_back({w, c.mean, std::sqrt(c.variance)});
  }
  return mixture_to_normal(NormalMixture(std::move(comps)), ref, quad);
}

MixtureDecomposition mixture_divergence_decomposition(
    std::span<const DiscreteDistribution> components, const DiscreteDistribution& ref) {
  if (components.empty()) throw InputError("mixture has no components");
  const std::size_t l = ref.size();
  const double w = 1.0 / static_cast<double>(components.size());
  std::vector<double> mix(l, 0.0);
  for (const auto& c : components) {
    if (c.size() != l) throw InputError("component alphabets differ from the reference");
    for (std::size_t i = 0; i < l; ++i) mix[i] += w * c[i];
  }
  double total = 0.0;
  for (double v : mix) total += v;
  for (double& v : mix) v /= total;
  const DiscreteDistribution mixture(std::move(mix));

  MixtureDecomposition d;
  CompensatedSum to_ref;
  CompensatedSum to_mix;
  for (const auto& c : components) {
    to_ref.add(w * divergence_discrete(c, ref));
    to_mix.add(w * divergence_discrete(c, mixture));
  }
  d.avg_component_to_ref = to_ref.value();
  d.avg_component_to_mixture = to_mix.value();
  d.mixture_to_ref = divergence_discrete(mixture, ref);
  finish_residual(d);
  return d;
}

MixtureDecomposition mixture_divergence_decomposition(std::span<const NormalComponent> components,
                                                      const NormalComponent& ref,
                                                      const QuadratureConfig& quad) {
  if (components.empty()) throw InputError("mixture has no components");
  quad.validate();
  check_normal(ref);
  const double w = 1.0 / static_cast<double>(components.size());
  std::vector<WeightedNormal> comps;
  for (const auto& c : components) {
    check_normal(c);
    comps.push_back({w, c.mean, std::sqrt(c.variance)});
  }
  const NormalMixture mix(comps);

  MixtureDecomposition d;
  CompensatedSum to_ref;
  CompensatedSum to_mix;
  for (const auto& c : components) {
    to_ref.add(w * normal_divergence(c, ref));
    const double sd = std::sqrt(c.variance);
    const double t = quad.truncation_sigmas;
    const double own = integrate_union({{c.mean - t * sd, c.mean + t * sd}}, quad,
                                       0.25 * mix.min_sd(), [&](double x) {
                                         const double log_p = log_normal_density(x, c);
                                         const double s = mix.scaled_density(x);
                                         return std::exp(log_p) *
                                                (log_p - (std::log(s) - kLogSqrtTwoPi));
                                       });
    to_mix.add(w * std::max(own, 0.0));
  }
  d.avg_component_to_ref = to_ref.value();
  d.avg_component_to_mixture = to_mix.value();
  d.mixture_to_ref = mixture_to_normal(mix, ref, quad);
  finish_residual(d);
  return d;
}

MixtureDecomposition mixture_divergence_decomposition(
    std::span<const VonMisesComponent> components, const VonMisesComponent& ref,
    const QuadratureConfig& quad) {
  if (components.empty()) throw InputError("mixture has no components");
  quad.validate();
  const double w = 1.0 / static_cast<double>(components.size());
  double max_kappa = ref.kappa;
  std::vector<WeightedVonMises> comps;
  for (const auto& c : components) {
    if (!(c.kappa >= 0.0)) throw RangeError("kappa must be >= 0");
    max_kappa = std::max(max_kappa, c.kappa);
    comps.push_back(VonMisesMixture::make(w, c.center, c.kappa));
  }
  const VonMisesMixture mix(comps);
  const WeightedVonMises reference = VonMisesMixture::make(1.0, ref.center, ref.kappa);
  const std::size_t nodes = periodic_nodes(quad, max_kappa);

  MixtureDecomposition d;
  CompensatedSum to_ref;
  CompensatedSum to_mix;
  for (std::size_t i = 0; i < components.size(); ++i) {
    to_ref.add(w * vonmises_divergence(components[i], ref));
    const WeightedVonMises single{1.0, comps[i].cos_center, comps[i].sin_center, comps[i].kappa,
                                  comps[i].inv_scaled_i0};
    const double own = periodic_mean(nodes, [&](double c, double s) {
      return bregman_term(VonMisesMixture::component(single, c, s), mix.scaled_density(c, s));
    });
    to_mix.add(w * std::max(own, 0.0));
  }
  d.avg_component_to_ref = to_ref.value();
  d.avg_component_to_mixture = to_mix.value();
  d.mixture_to_ref = std::max(0.0, periodic_mean(nodes, [&](double c, double s) {
    return bregman_term(mix.scaled_density(c, s), VonMisesMixture::component(reference, c, s));
  }));
  finish_residual(d);
  return d;
}

}  // namespace rdgof
