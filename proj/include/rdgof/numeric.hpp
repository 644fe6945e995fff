#pragma once

#include <cmath>
#include <span>

namespace rdgof {

// Neumaier-compensated running sum. Summation order is the call order, so
// results are reproducible for a fixed input order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double compensated_total(std::span<const double> xs) noexcept;

// ln(sum exp(x_i)); -inf for an empty range or all -inf entries.
double log_sum_exp(std::span<const double> xs) noexcept;

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

// Inverse of the standard normal cdf on (0, 1), accurate to a few ulps.
// Returns -inf / +inf at 0 / 1 and NaN outside [0, 1].
double normal_quantile(double p) noexcept;

// ln C(n, k).
double log_binomial(unsigned n, unsigned k) noexcept;

}  // namespace rdgof
