#ifndef HRLME_NNKIT_HPP
#define HRLME_NNKIT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hrlme::nn {

// Row-major storage so that checkpoint bytes follow the in-memory layout.
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixT<double>;
using Vector = VectorT<double>;

/// Probabilities are floored here before any log.
inline constexpr double kProbFloor = 1e-12;

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  // Clamp keeps exp() finite; branch on sign for stability.
  z = std::clamp(z, Scalar(-700), Scalar(700));
  if (z >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-z));
  }
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(sigmoid(z)) without underflow for large negative z.
template <typename Scalar>
Scalar log_sigmoid(Scalar z) {
  if (z >= Scalar(0)) {
    return -std::log1p(std::exp(-z));
  }
  return z - std::log1p(std::exp(z));
}

template <typename Derived>
VectorT<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  if (logits.size() == 0) {
    throw std::invalid_argument("softmax: empty input");
  }
  VectorT<Scalar> out = (logits.array() - logits.maxCoeff()).exp().matrix();
  out /= out.sum();
  return out;
}

template <typename Derived>
typename Derived::Scalar cross_entropy(const Eigen::MatrixBase<Derived>& probs, Eigen::Index label) {
  using Scalar = typename Derived::Scalar;
  if (label < 0 || label >= probs.size()) {
    throw std::out_of_range("cross_entropy: label " + std::to_string(label) + " out of range");
  }
  return -std::log(std::max(probs(label), Scalar(kProbFloor)));
}

/// Output of a width-3 convolution followed by max-over-time pooling.
struct PoolResult {
  Vector pooled;
  /// Winning window start row per feature; ties go to the lowest index.
  std::vector<Eigen::Index> argmax;
};

/// input is T x d, filters is d_s x 3d, bias is d_s.
PoolResult conv3_maxpool(const Matrix& input, const Matrix& filters, const Vector& bias);

/// Routes d(pooled) back through the winning windows. Gradients are accumulated
/// (+=) into the output arguments, which must be pre-sized.
void conv3_maxpool_backward(const Matrix& input, const Matrix& filters,
                            const std::vector<Eigen::Index>& argmax, const Vector& d_pooled,
                            Matrix& d_filters, Vector& d_bias, Matrix& d_input);

/// Named parameters with matching gradient buffers, kept in insertion order.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;
  };

  /// Returns the entry index. Names must be unique.
  std::size_t add(const std::string& name, Matrix value);

  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Entry& entry(std::size_t i) { return entries_.at(i); }
  const Entry& entry(std::size_t i) const { return entries_.at(i); }
  Matrix& value(std::size_t i) { return entries_.at(i).value; }
  const Matrix& value(std::size_t i) const { return entries_.at(i).value; }
  Matrix& grad(std::size_t i) { return entries_.at(i).grad; }
  const Matrix& grad(std::size_t i) const { return entries_.at(i).grad; }

  void zero_grad();
  std::size_t total_size() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const ParamSet& other) const;

 private:
  std::deque<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// value <- value - lr * grad for every entry, then zeroes the gradients.
void sgd_step(ParamSet& params, double lr);

/// Computes the loss and writes analytic gradients into params' grad buffers.
using LossFn = std::function<double(ParamSet&)>;

/// Central-difference check on n_coords random coordinates. Returns the max
/// relative error |a - n| / max(|a|, |n|, 1e-8).
double finite_diff_check(const LossFn& loss_fn, ParamSet& params, double eps, std::size_t n_coords,
                         std::uint64_t seed);

/// Same check over every coordinate of one entry.
double finite_diff_check_entry(const LossFn& loss_fn, ParamSet& params, std::size_t entry, double eps);

/// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next() { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Fills m with uniform values in [-scale, scale].
void fill_uniform(Matrix& m, double scale, Rng& rng);

}  // namespace hrlme::nn

#endif  // HRLME_NNKIT_HPP
