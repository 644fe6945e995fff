#pragma once

// Reproducible random streams and the data-generating models used by the
// Monte Carlo harness. Every transform is implemented here rather than with
// <random> distributions, whose output is implementation-defined; the
// engine (mt19937_64) has a fixed output sequence in the standard.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "rdgof/core.hpp"

namespace rdgof {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of replication `index` under master seed `master`. Depends on the
// pair only, so any execution order yields the same streams.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_replication(std::uint64_t master, std::uint64_t index) {
    return Rng(replication_seed(master, index));
  }

  std::uint64_t next() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform();
  // (0, 1)
  double uniform_open();
  // Unbiased integer in [0, n).
  std::size_t index(std::size_t n);
  double normal();
  // Best-Fisher rejection sampler, result in [0, 2 pi).
  double vonmises(double mean, double kappa);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

struct UniformDiscreteModel {
  std::size_t l;
};
struct StandardNormalModel {};
struct UniformCircleModel {};

using NullModel = std::variant<UniformDiscreteModel, StandardNormalModel, UniformCircleModel>;

struct CategoricalModel {
  DiscreteDistribution probs;
};
struct NormalModel {
  double mean = 0.0;
  double sd = 1.0;
};
struct VonMisesModel {
  double mean = 0.0;
  double kappa = 0.0;
};

using SamplingModel = std::variant<UniformDiscreteModel, StandardNormalModel, UniformCircleModel,
                                   CategoricalModel, NormalModel, VonMisesModel>;

SamplingModel as_sampling_model(const NullModel& model);

EmpiricalSample draw_sample(const SamplingModel& model, std::size_t n, Rng& rng);

std::string describe(const SamplingModel& model);

}  // namespace rdgof
