#include "rdgof/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

namespace rdgof {

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  DenseMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw InputError("matrix row " + std::to_string(r) + " has " +
                       std::to_string(rows[r].size()) + " entries, expected " +
                       std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InputError("distribution needs at least one symbol");
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw InputError("probability " + std::to_string(i) + " is negative or not finite");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total << ", not 1";
    throw InputError(os.str());
  }
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t l) {
  if (l == 0) throw InputError("alphabet size must be positive");
  return DiscreteDistribution(std::vector<double>(l, 1.0 / static_cast<double>(l)));
}

bool DiscreteDistribution::is_uniform() const noexcept {
  const double u = 1.0 / static_cast<double>(probs_.size());
  for (double p : probs_) {
    if (p != u) return false;
  }
  return true;
}

double wrap_angle(double theta) noexcept {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number can round back up to 2*pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

EmpiricalSample EmpiricalSample::categorical(std::vector<std::size_t> labels, std::size_t l) {
  if (labels.empty()) throw InputError("sample is empty");
  if (l == 0) throw InputError("alphabet size must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= l) {
      throw InputError("label " + std::to_string(labels[i]) + " at position " +
                       std::to_string(i) + " is outside [0, " + std::to_string(l) + ")");
    }
  }
  return EmpiricalSample(CategoricalData{std::move(labels)}, l);
}

EmpiricalSample EmpiricalSample::real(std::vector<double> values) {
  if (values.empty()) throw InputError("sample is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InputError("observation " + std::to_string(i) + " is not finite");
    }
  }
  return EmpiricalSample(RealData{std::move(values)}, 0);
}

EmpiricalSample EmpiricalSample::circular(std::vector<double> angles) {
  if (angles.empty()) throw InputError("sample is empty");
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!std::isfinite(angles[i])) {
      throw InputError("angle " + std::to_string(i) + " is not finite");
    }
    angles[i] = wrap_angle(angles[i]);
  }
  return EmpiricalSample(CircularData{std::move(angles)}, 0);
}

std::size_t EmpiricalSample::size() const noexcept {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, CategoricalData>) return d.labels.size();
        else if constexpr (std::is_same_v<T, RealData>) return d.values.size();
        else return d.angles.size();
      },
      data_);
}

HammingMixture::HammingMixture(double a, std::size_t size) : alpha(a), l(size) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw RangeError("hamming alpha must lie in [0, 1]");
  if (l == 0) throw InputError("alphabet size must be positive");
}

GaussianChannel::GaussianChannel(double a) : alpha(a) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw RangeError("gaussian alpha must lie in [0, 1)");
}

VonMisesSmoother::VonMisesSmoother(double k) : kappa(k) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw RangeError("kappa must be >= 0");
}

DiscreteChannel::DiscreteChannel(DenseMatrix m) : matrix(std::move(m)) {
  if (matrix.rows() == 0 || matrix.cols() == 0) throw InputError("channel matrix is empty");
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double total = 0.0;
    for (double w : matrix.row(r)) {
      if (!(w >= 0.0)) throw InputError("channel row " + std::to_string(r) + " has a negative entry");
      total += w;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw InputError("channel row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

std::string describe(const SmoothingKernel& kernel) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, HammingMixture>) {
          os << "hamming(alpha=" << k.alpha << ",l=" << k.l << ")";
        } else if constexpr (std::is_same_v<T, GaussianChannel>) {
          os << "gaussian(alpha=" << k.alpha << ")";
        } else if constexpr (std::is_same_v<T, VonMisesSmoother>) {
          os << "vonmises(kappa=" << k.kappa << ")";
        } else {
          os << "channel(" << k.matrix.rows() << "x" << k.matrix.cols() << ")";
        }
      },
      kernel);
  return os.str();
}

DistortionMatrix::DistortionMatrix(DenseMatrix m) : d(std::move(m)) {
  if (d.rows() == 0 || d.cols() == 0) throw InputError("distortion matrix is empty");
  for (double v : d.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InputError("distortion entries must be finite and nonnegative");
    }
  }
}

DenseMatrix distortion_matrix(const DistortionSpec& spec) {
  if (const auto* m = std::get_if<DistortionMatrix>(&spec)) return m->d;
  if (const auto* h = std::get_if<HammingDistortion>(&spec)) {
    if (h->l == 0) throw InputError("alphabet size must be positive");
    DenseMatrix d(h->l, h->l, 1.0);
    for (std::size_t i = 0; i < h->l; ++i) d(i, i) = 0.0;
    return d;
  }
  throw InputError("continuous distortion has no matrix form");
}

double squared_euclidean(double x, double y) noexcept { return (y - x) * (y - x); }

double squared_chord(double theta1, double theta2) noexcept {
  const double s = std::sin(0.5 * (theta2 - theta1));
  return 4.0 * s * s;
}

DiscreteDistribution empirical_distribution(std::span<const std::size_t> labels, std::size_t l) {
  if (labels.empty()) throw InputError("sample is empty");
  if (l == 0) throw InputError("alphabet size must be positive");
  std::vector<std::size_t> counts(l, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= l) {
      throw InputError("label " + std::to_string(labels[i]) + " at position " +
                       std::to_string(i) + " is outside [0, " + std::to_string(l) + ")");
    }
    ++counts[labels[i]];
  }
  const double n = static_cast<double>(labels.size());
  std::vector<double> probs(l);
  for (std::size_t i = 0; i < l; ++i) probs[i] = static_cast<double>(counts[i]) / n;
  return DiscreteDistribution(std::move(probs));
}

DiscreteDistribution empirical_distribution(const EmpiricalSample& sample, std::size_t l) {
  const auto* cat = sample.as_categorical();
  if (cat == nullptr) throw InputError("empirical_distribution needs categorical data");
  return empirical_distribution(cat->labels, l);
}

double divergence_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) throw InputError("alphabet sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    total += pi * std::log(pi / q[i]);
  }
  // Rounding can leave a tiny negative value when p == q up to ulps.
  return total < 0.0 ? 0.0 : total;
}

double pearson_chi2(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) throw InputError("alphabet sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) throw InputError("pearson_chi2 needs a reference with full support");
    const double diff = p[i] - q[i];
    total += diff * diff / q[i];
  }
  return total;
}

}  // namespace rdgof
