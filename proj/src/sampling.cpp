#include "rdgof/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdgof {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  for (;;) {
    const double u = uniform();
    if (u > 0.0) return u;
  }
}

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t range = n;
  // 2^64 mod n; draws below it would bias the remainder.
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return static_cast<std::size_t>(r % range);
  }
}

double Rng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  // Marsaglia polar method.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s == 0.0 || s >= 1.0) continue;
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    return u * f;
  }
}

double Rng::vonmises(double mean, double kappa) {
  if (kappa < 1e-8) return kTwoPi * uniform();
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(0.5 * kTwoPi * uniform());
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = uniform_open();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double u3 = uniform();
      const double theta = (u3 < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
      return wrap_angle(mean + theta);
    }
  }
}

SamplingModel as_sampling_model(const NullModel& model) {
  return std::visit([](const auto& m) -> SamplingModel { return m; }, model);
}

EmpiricalSample draw_sample(const SamplingModel& model, std::size_t n, Rng& rng) {
  if (n == 0) throw InputError("sample size must be positive");
  return std::visit(
      [n, &rng](const auto& m) -> EmpiricalSample {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformDiscreteModel>) {
          std::vector<std::size_t> labels(n);
          for (auto& x : labels) x = rng.index(m.l);
          return EmpiricalSample::categorical(std::move(labels), m.l);
        } else if constexpr (std::is_same_v<T, CategoricalModel>) {
          const auto probs = m.probs.probs();
          std::vector<double> cumulative(probs.size());
          double acc = 0.0;
          for (std::size_t i = 0; i < probs.size(); ++i) cumulative[i] = (acc += probs[i]);
          std::vector<std::size_t> labels(n);
          for (auto& x : labels) {
            const double u = rng.uniform() * acc;
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            x = std::min(static_cast<std::size_t>(it - cumulative.begin()), probs.size() - 1);
          }
          return EmpiricalSample::categorical(std::move(labels), probs.size());
        } else if constexpr (std::is_same_v<T, StandardNormalModel>) {
          std::vector<double> xs(n);
          for (auto& x : xs) x = rng.normal();
          return EmpiricalSample::real(std::move(xs));
        } else if constexpr (std::is_same_v<T, NormalModel>) {
          std::vector<double> xs(n);
          for (auto& x : xs) x = m.mean + m.sd * rng.normal();
          return EmpiricalSample::real(std::move(xs));
        } else if constexpr (std::is_same_v<T, UniformCircleModel>) {
          std::vector<double> xs(n);
          for (auto& x : xs) x = kTwoPi * rng.uniform();
          return EmpiricalSample::circular(std::move(xs));
        } else {
          std::vector<double> xs(n);
          for (auto& x : xs) x = rng.vonmises(m.mean, m.kappa);
          return EmpiricalSample::circular(std::move(xs));
        }
      },
      model);
}

std::string describe(const SamplingModel& model) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformDiscreteModel>) {
          os << "uniform(l=" << m.l << ")";
        } else if constexpr (std::is_same_v<T, StandardNormalModel>) {
          os << "normal(0,1)";
        } else if constexpr (std::is_same_v<T, UniformCircleModel>) {
          os << "uniform-circle";
        } else if constexpr (std::is_same_v<T, CategoricalModel>) {
          os << "discrete(";
          for (std::size_t i = 0; i < m.probs.size(); ++i) os << (i ? "," : "") << m.probs[i];
          os << ")";
        } else if constexpr (std::is_same_v<T, NormalModel>) {
          os << "normal(" << m.mean << "," << m.sd << ")";
        } else {
          os << "vonmises(" << m.mean << "," << m.kappa << ")";
        }
      },
      model);
  return os.str();
}

}  // namespace rdgof
