#pragma once

// Closed-form smoothing kernels for the three model problems (uniform
// categorical with Hamming distortion, standard normal with squared error,
// uniform circle with squared chord distortion), their distortion <->
// parameter conversions and the modified Bessel functions they rely on.

#include <cstddef>

#include "rdgof/core.hpp"

namespace rdgof {

// Upper limit for the von Mises concentration; d0 -> 0 saturates here.
inline constexpr double kMaxKappa = 1e6;

// ---- Hamming mixture ------------------------------------------------------

// alpha * p + (1 - alpha) * U. Exact on U: returns U bit for bit.
DiscreteDistribution apply_hamming(const HammingMixture& kernel, const DiscreteDistribution& p);

// Output law sum_x p(x) W(.|x) of a general channel.
DiscreteDistribution apply_channel(const DiscreteChannel& channel, const DiscreteDistribution& p);

// The Hamming kernel as an l x l row-stochastic matrix.
DiscreteChannel hamming_channel(const HammingMixture& kernel);

// Expected Hamming distortion (1 - alpha)(l - 1)/l.
double hamming_distortion_of_alpha(double alpha, std::size_t l);

// Inverse of hamming_distortion_of_alpha; RangeError for d0 outside [0, (l-1)/l].
double hamming_alpha_from_distortion(double d0, std::size_t l);

// ---- Gaussian channel -----------------------------------------------------

struct NormalComponent {
  double mean;
  double variance;
};

// x -> N(alpha x, 1 - alpha^2).
NormalComponent gaussian_smooth_point(double x, double alpha);

// Expected squared error under X ~ N(0,1): 2 (1 - alpha).
double gaussian_distortion_of_alpha(double alpha);

// alpha = 1 - d0/2 for d0 in (0, 2].
double gaussian_alpha_from_distortion(double d0);

// ---- Modified Bessel functions of the first kind --------------------------
//
// Power series below kappa = 15, Hankel asymptotic expansion above. The
// scaled variants return exp(-kappa) I_nu(kappa) and never overflow.

double bessel_i0(double kappa);
double bessel_i1(double kappa);
double bessel_i0_scaled(double kappa);
double bessel_i1_scaled(double kappa);

// I1(kappa) / I0(kappa), in [0, 1).
double bessel_i1_over_i0(double kappa);

// ln I0(kappa), finite for every kappa >= 0.
double log_bessel_i0(double kappa);

// ---- von Mises smoother ---------------------------------------------------

// exp(kappa cos(theta - center)) / (2 pi I0(kappa)).
double vonmises_density(double theta, double center, double kappa);

// Expected squared chord distortion 2 - 2 I1(kappa)/I0(kappa).
double vonmises_distortion_of_kappa(double kappa);

// Solves vonmises_distortion_of_kappa(kappa) = d0 by bisection; d0 in (0, 2).
// Saturates at kMaxKappa when the root lies beyond it.
double vonmises_kappa_from_distortion(double d0);

}  // namespace rdgof
