#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "rdgof/core.hpp"

namespace testing {

constexpr double kPi = std::numbers::pi;

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Random probability vector. With full_support every weight is at least
// floor before normalization.
inline rdgof::DiscreteDistribution random_distribution(TestRng& rng, std::size_t l,
                                                       bool full_support = true,
                                                       double floor = 1e-3) {
  std::vector<double> w(l);
  double total = 0.0;
  for (auto& x : w) {
    x = (full_support ? floor : 0.0) + rng.uniform();
    if (!full_support && rng.uniform() < 0.2) x = 0.0;
    total += x;
  }
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  // Push the rounding residue into the largest entry.
  double s = 0.0;
  std::size_t big = 0;
  for (std::size_t i = 0; i < l; ++i) {
    s += w[i];
    if (w[i] > w[big]) big = i;
  }
  w[big] += 1.0 - s;
  return rdgof::DiscreteDistribution(std::move(w));
}

// Empirical distribution of n uniform draws on l symbols.
inline rdgof::DiscreteDistribution random_empirical(TestRng& rng, std::size_t l, std::size_t n) {
  std::vector<std::size_t> labels(n);
  for (auto& x : labels) x = rng.index(l);
  return rdgof::empirical_distribution(labels, l);
}

// Binary entropy in nats.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// Composite Simpson rule with an even number of panels.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t panels) {
  if (panels % 2 == 1) ++panels;
  const double h = (b - a) / static_cast<double>(panels);
  long double sum = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) {
    sum += (i % 2 == 1 ? 4.0L : 2.0L) * f(a + h * static_cast<double>(i));
  }
  return static_cast<double>(sum * h / 3.0L);
}

// Periodic trapezoid rule over [0, 2 pi).
template <typename F>
double periodic_trapezoid(F&& f, std::size_t nodes) {
  long double sum = 0.0L;
  const double h = 2.0 * kPi / static_cast<double>(nodes);
  for (std::size_t i = 0; i < nodes; ++i) sum += f(h * static_cast<double>(i));
  return static_cast<double>(sum * h);
}

}  // namespace testing
