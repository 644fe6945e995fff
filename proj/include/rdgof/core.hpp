#pragma once

// Domain types shared by every module plus elementary distribution
// arithmetic. All divergences are in nats.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rdgof/errors.hpp"

namespace rdgof {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Tolerance on |sum(probs) - 1| accepted by DiscreteDistribution.
inline constexpr double kNormalizationTolerance = 1e-12;

// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Builds from nested rows; every row must have the same length.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Probability vector over a finite alphabet {0, ..., l-1}.
class DiscreteDistribution {
 public:
  // Throws InputError unless probs is nonempty, nonnegative and sums to one
  // within kNormalizationTolerance. Inputs are never renormalized.
  explicit DiscreteDistribution(std::vector<double> probs);

  static DiscreteDistribution uniform(std::size_t l);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  bool is_uniform() const noexcept;

  bool operator==(const DiscreteDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

// Reduces an angle in radians to [0, 2*pi).
double wrap_angle(double theta) noexcept;

struct CategoricalData {
  std::vector<std::size_t> labels;
};
struct RealData {
  std::vector<double> values;
};
struct CircularData {
  std::vector<double> angles;  // always in [0, 2*pi)
};

// Raw observations. Construct through the named factories so the
// invariants (n >= 1, label range, wrapped angles) hold.
class EmpiricalSample {
 public:
  using Data = std::variant<CategoricalData, RealData, CircularData>;

  static EmpiricalSample categorical(std::vector<std::size_t> labels, std::size_t l);
  static EmpiricalSample real(std::vector<double> values);
  static EmpiricalSample circular(std::vector<double> angles);

  std::size_t size() const noexcept;
  const Data& data() const noexcept { return data_; }

  // Alphabet size for categorical samples, 0 otherwise.
  std::size_t alphabet_size() const noexcept { return alphabet_size_; }

  const CategoricalData* as_categorical() const { return std::get_if<CategoricalData>(&data_); }
  const RealData* as_real() const { return std::get_if<RealData>(&data_); }
  const CircularData* as_circular() const { return std::get_if<CircularData>(&data_); }

 private:
  EmpiricalSample(Data data, std::size_t l) : data_(std::move(data)), alphabet_size_(l) {}

  Data data_;
  std::size_t alphabet_size_ = 0;
};

// x -> alpha * delta_x + (1 - alpha) * U on an alphabet of size l.
struct HammingMixture {
  double alpha;
  std::size_t l;

  HammingMixture(double alpha, std::size_t l);
};

// x -> law of alpha * x + sqrt(1 - alpha^2) * Z.
struct GaussianChannel {
  double alpha;

  explicit GaussianChannel(double alpha);
};

// theta -> von Mises(theta, kappa).
struct VonMisesSmoother {
  double kappa;

  explicit VonMisesSmoother(double kappa);
};

// General row-stochastic channel W(y|x), rows indexed by source symbol.
struct DiscreteChannel {
  DenseMatrix matrix;

  explicit DiscreteChannel(DenseMatrix m);
};

using SmoothingKernel =
    std::variant<HammingMixture, GaussianChannel, VonMisesSmoother, DiscreteChannel>;

std::string describe(const SmoothingKernel& kernel);

// A point on the rate-distortion curve; rate in nats.
struct RDPoint {
  double rate = 0.0;
  double distortion = 0.0;
  double beta = 0.0;
};

// Nonnegative l x m distortion matrix d(x, y).
struct DistortionMatrix {
  DenseMatrix d;

  explicit DistortionMatrix(DenseMatrix m);
};
struct HammingDistortion {
  std::size_t l;
};
struct SquaredEuclideanReal {};
// d(t1, t2) = 2 - 2 cos(t2 - t1) = 4 sin^2((t2 - t1) / 2).
struct SquaredChordCircle {};

using DistortionSpec =
    std::variant<DistortionMatrix, HammingDistortion, SquaredEuclideanReal, SquaredChordCircle>;

// Expands a finite-alphabet distortion into its matrix. Throws InputError
// for the continuous variants.
DenseMatrix distortion_matrix(const DistortionSpec& spec);

double squared_euclidean(double x, double y) noexcept;
double squared_chord(double theta1, double theta2) noexcept;

struct TestReport {
  double statistic = 0.0;
  std::string kernel;
  std::size_t n = 0;
  std::optional<double> critical_value;
  std::optional<double> p_value;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

// probs[i] = count(i) / n. Throws InputError for labels >= l.
DiscreteDistribution empirical_distribution(const EmpiricalSample& sample, std::size_t l);
DiscreteDistribution empirical_distribution(std::span<const std::size_t> labels, std::size_t l);

// sum p_i ln(p_i / q_i) with 0 ln(0/q) = 0; +inf on support violation.
double divergence_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q);

// sum (p_i - q_i)^2 / q_i. Throws InputError when q lacks full support.
double pearson_chi2(const DiscreteDistribution& p, const DiscreteDistribution& q);

}  // namespace rdgof
