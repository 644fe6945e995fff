#include "rdgof/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rdgof {

DiscreteDistribution apply_hamming(const HammingMixture& kernel, const DiscreteDistribution& p) {
  if (kernel.l != p.size()) throw InputError("kernel and distribution alphabets differ");
  const double u = 1.0 / static_cast<double>(kernel.l);
  const double a = kernel.alpha;
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // a*u + (1-a)*u can differ from u by an ulp; keep U a fixed point.
    out[i] = (p[i] == u) ? u : a * p[i] + (1.0 - a) * u;
  }
  return DiscreteDistribution(std::move(out));
}

DiscreteDistribution apply_channel(const DiscreteChannel& channel, const DiscreteDistribution& p) {
  const auto& w = channel.matrix;
  if (w.rows() != p.size()) throw InputError("channel rows do not match the distribution");
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t x = 0; x < w.rows(); ++x) {
    if (p[x] == 0.0) continue;
    for (std::size_t y = 0; y < w.cols(); ++y) out[y] += p[x] * w(x, y);
  }
  return DiscreteDistribution(std::move(out));
}

DiscreteChannel hamming_channel(const HammingMixture& kernel) {
  const double u = 1.0 / static_cast<double>(kernel.l);
  DenseMatrix m(kernel.l, kernel.l, (1.0 - kernel.alpha) * u);
  for (std::size_t i = 0; i < kernel.l; ++i) m(i, i) = kernel.alpha + (1.0 - kernel.alpha) * u;
  return DiscreteChannel(std::move(m));
}

double hamming_distortion_of_alpha(double alpha, std::size_t l) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw RangeError("hamming alpha must lie in [0, 1]");
  if (l == 0) throw InputError("alphabet size must be positive");
  const double ld = static_cast<double>(l);
  return (1.0 - alpha) * (ld - 1.0) / ld;
}

double hamming_alpha_from_distortion(double d0, std::size_t l) {
  if (l == 0) throw InputError("alphabet size must be positive");
  const double ld = static_cast<double>(l);
  const double dmax = (ld - 1.0) / ld;
  if (!(d0 >= 0.0 && d0 <= dmax)) {
    throw RangeError("hamming distortion must lie in [0, " + std::to_string(dmax) + "]");
  }
  if (l == 1) return 1.0;
  return 1.0 - d0 * ld / (ld - 1.0);
}

NormalComponent gaussian_smooth_point(double x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw RangeError("gaussian alpha must lie in [0, 1)");
  return {alpha * x, 1.0 - alpha * alpha};
}

double gaussian_distortion_of_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw RangeError("gaussian alpha must lie in [0, 1)");
  return 2.0 * (1.0 - alpha);
}

double gaussian_alpha_from_distortion(double d0) {
  if (!(d0 > 0.0 && d0 <= 2.0)) throw RangeError("gaussian distortion must lie in (0, 2]");
  return 1.0 - 0.5 * d0;
}

namespace {

constexpr double kSeriesLimit = 15.0;

// exp(-x) * sum_k (x/2)^(2k+nu) / (k! (k+nu)!), nu in {0, 1}.
double scaled_series(double x, int nu) {
  const double q = 0.25 * x * x;
  double term = (nu == 0) ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum * std::exp(-x);
}

// Hankel expansion of exp(-x) I_nu(x), truncated at its smallest term.
double scaled_asymptotic(double x, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (odd * odd - mu) / (8.0 * k * x);
    if (std::abs(next) >= last) break;
    last = std::abs(next);
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(kTwoPi * x);
}

void check_kappa(double kappa) {
  if (!(kappa >= 0.0) || std::isnan(kappa)) throw RangeError("bessel argument must be >= 0");
}

double unscale(double scaled, double kappa) {
  const double value = scaled * std::exp(kappa);
  if (!std::isfinite(value)) {
    throw RangeError("bessel function overflows at argument " + std::to_string(kappa));
  }
  return value;
}

}  // namespace

double bessel_i0_scaled(double kappa) {
  check_kappa(kappa);
  if (std::isinf(kappa)) return 0.0;
  return kappa < kSeriesLimit ? scaled_series(kappa, 0) : scaled_asymptotic(kappa, 0);
}

double bessel_i1_scaled(double kappa) {
  check_kappa(kappa);
  if (std::isinf(kappa)) return 0.0;
  return kappa < kSeriesLimit ? scaled_series(kappa, 1) : scaled_asymptotic(kappa, 1);
}

double bessel_i0(double kappa) { return unscale(bessel_i0_scaled(kappa), kappa); }

double bessel_i1(double kappa) { return unscale(bessel_i1_scaled(kappa), kappa); }

double bessel_i1_over_i0(double kappa) {
  check_kappa(kappa);
  if (kappa == 0.0) return 0.0;
  return bessel_i1_scaled(kappa) / bessel_i0_scaled(kappa);
}

double log_bessel_i0(double kappa) { return std::log(bessel_i0_scaled(kappa)) + kappa; }

double vonmises_density(double theta, double center, double kappa) {
  check_kappa(kappa);
  if (kappa == 0.0) return 1.0 / kTwoPi;
  return std::exp(kappa * (std::cos(theta - center) - 1.0)) / (kTwoPi * bessel_i0_scaled(kappa));
}

double vonmises_distortion_of_kappa(double kappa) { return 2.0 - 2.0 * bessel_i1_over_i0(kappa); }

double vonmises_kappa_from_distortion(double d0) {
  if (!(d0 > 0.0 && d0 < 2.0)) throw RangeError("circular distortion must lie in (0, 2)");
  auto residual = [d0](double k) { return vonmises_distortion_of_kappa(k) - d0; };
  if (residual(kMaxKappa) >= 0.0) return kMaxKappa;

  // distortion decreases in kappa: residual(lo) > 0 >= residual(hi).
  double lo = 0.0;
  double hi = 1.0;
  while (residual(hi) > 0.0) {
    lo = hi;
    hi = std::min(2.0 * hi, kMaxKappa);
  }
  // Bisect until the bracket stops shrinking; the residual is then far
  // below 1e-10.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = residual(mid);
    if (r == 0.0) return mid;
    if (r > 0.0) lo = mid;
    else hi = mid;
  }
  const double rlo = std::abs(residual(lo));
  const double rhi = std::abs(residual(hi));
  const double best = rlo < rhi ? lo : hi;
  if (std::min(rlo, rhi) >= 1e-10) {
    throw NumericError("kappa bisection stalled for distortion " + std::to_string(d0));
  }
  return best;
}

}  // namespace rdgof
