#pragma once

// Rate-distortion goodness-of-fit statistics D(Psi(Emp_n) || Psi(P0)) for
// the three closed-form kernels, the classical baselines they interpolate
// between, and the mixture compensation identity
//
//   D(Pbar || Q) = avg_i D(P_i || Q) - avg_i D(P_i || Pbar),  Pbar = avg_i P_i.
//
// Continuous divergences use deterministic trapezoid quadrature: over the
// union of +-T sigma windows around the mixture components on the line,
// and the periodic rule on the circle. Both converge spectrally for these
// smooth integrands, so doubling the grid leaves results unchanged to ~1e-12.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rdgof/core.hpp"
#include "rdgof/kernels.hpp"

namespace rdgof {

struct QuadratureConfig {
  // Minimum number of nodes; more are added when the narrowest component
  // would otherwise get fewer than four nodes per standard deviation.
  std::size_t grid_points = 4096;
  // Half width of the integration window around each component, in sigmas.
  double truncation_sigmas = 10.0;

  void validate() const;
};

struct CircularSummary {
  double mean_cos = 0.0;
  double mean_sin = 0.0;
  double resultant_norm_sq = 0.0;
};

struct VonMisesComponent {
  double center;
  double kappa;
};

struct MixtureDecomposition {
  double avg_component_to_ref = 0.0;
  double avg_component_to_mixture = 0.0;
  double mixture_to_ref = 0.0;
  // |mixture_to_ref - (avg_component_to_ref - avg_component_to_mixture)|
  double residual = 0.0;
};

// ---- rate-distortion statistics -------------------------------------------

// D(alpha emp + (1-alpha) U || alpha null + (1-alpha) U). With a uniform
// null (the intended case) the second argument is U itself. At alpha = 1 this
// is the same computation as lr_statistic.
double rd_statistic_hamming(const DiscreteDistribution& emp, const DiscreteDistribution& null,
                            double alpha);
double rd_statistic_hamming(const DiscreteDistribution& emp, double alpha);

// D(emp W || null W) for a general channel, e.g. one produced by the solver.
double rd_statistic_channel(const DiscreteDistribution& emp, const DiscreteDistribution& null,
                            const DiscreteChannel& channel);

// D(avg_i N(alpha x_i, 1 - alpha^2) || N(0, 1)). RangeError unless 0 <= alpha < 1.
double rd_statistic_gaussian(std::span<const double> xs, double alpha,
                             const QuadratureConfig& quad = {});

// D(avg_i vM(theta_i, kappa) || uniform).
double rd_statistic_circular(std::span<const double> angles, double kappa,
                             const QuadratureConfig& quad = {});

// ---- baselines ------------------------------------------------------------

double lr_statistic(const DiscreteDistribution& emp, const DiscreteDistribution& p0);

// Shannon entropy in nats.
double entropy_statistic(const DiscreteDistribution& binned);

CircularSummary rayleigh_statistic(std::span<const double> angles);

// (1/n) sum x_i^2
double second_moment(std::span<const double> xs);
double sample_mean(std::span<const double> xs);

// Bin j (0-based) receives the points of [F^-1(j/k), F^-1((j+1)/k)).
DiscreteDistribution quantile_bin(std::span<const double> xs,
                                  const std::function<double(double)>& inverse_cdf,
                                  std::size_t k);

// ---- divergences between mixtures and single laws -------------------------

double normal_divergence(const NormalComponent& p, const NormalComponent& q);
double vonmises_divergence(const VonMisesComponent& p, const VonMisesComponent& q);

// D(avg_i N_i || ref) by quadrature; components may have different variances.
double normal_mixture_divergence(std::span<const NormalComponent> components,
                                 const NormalComponent& ref, const QuadratureConfig& quad = {});

// The three terms of the compensation identity, each computed on its own
// (closed form for component-to-reference, quadrature for the rest). Throws
// NumericError when the identity fails by more than 1e-8.
MixtureDecomposition mixture_divergence_decomposition(
    std::span<const DiscreteDistribution> components, const DiscreteDistribution& ref);
MixtureDecomposition mixture_divergence_decomposition(std::span<const NormalComponent> components,
                                                      const NormalComponent& ref,
                                                      const QuadratureConfig& quad = {});
MixtureDecomposition mixture_divergence_decomposition(
    std::span<const VonMisesComponent> components, const VonMisesComponent& ref,
    const QuadratureConfig& quad = {});

}  // namespace rdgof
