#ifndef HRLME_POLICY_HPP
#define HRLME_POLICY_HPP

#include "hrlme/checkpoint.hpp"
#include "hrlme/nnkit.hpp"

#include <string>

namespace hrlme {

/// Bernoulli policy pi(a=1|s) = sigmoid(w.s + b). Parameters live in a ParamSet
/// under "<prefix>.w" (dim x 1) and "<prefix>.b" (1 x 1).
class LinearSigmoidPolicy {
 public:
  LinearSigmoidPolicy(const std::string& prefix, Eigen::Index state_dim) : prefix_(prefix) {
    params_.add(prefix + ".w", nn::Matrix::Zero(state_dim, 1));
    params_.add(prefix + ".b", nn::Matrix::Zero(1, 1));
  }

  Eigen::Index state_dim() const { return params_.value(0).rows(); }
  const std::string& prefix() const { return prefix_; }

  auto weights() { return params_.value(0).col(0); }
  auto weights() const { return params_.value(0).col(0); }
  double& bias() { return params_.value(1)(0, 0); }
  double bias() const { return params_.value(1)(0, 0); }

  template <typename Derived>
  double logit(const Eigen::MatrixBase<Derived>& state) const {
    return weights().dot(state) + bias();
  }

  template <typename Derived>
  double prob(const Eigen::MatrixBase<Derived>& state) const {
    return nn::sigmoid(logit(state));
  }

  template <typename Derived>
  double log_prob(const Eigen::MatrixBase<Derived>& state, bool action) const {
    const double z = logit(state);
    return action ? nn::log_sigmoid(z) : nn::log_sigmoid(-z);
  }

  /// Flattened parameter vector [w; b].
  nn::Vector flat() const {
    nn::Vector v(state_dim() + 1);
    v << weights(), bias();
    return v;
  }

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  void export_to(Checkpoint& ckpt) const { export_params(params_, ckpt); }
  void import_from(const Checkpoint& ckpt) { import_params(ckpt, params_); }

  bool operator==(const LinearSigmoidPolicy& other) const { return params_ == other.params_; }

 private:
  std::string prefix_;
  nn::ParamSet params_;
};

/// d/d[w;b] log pi(action|state) = (action - pi) * [state; 1].
template <typename Derived>
nn::Vector score_gradient(const Eigen::MatrixBase<Derived>& state, bool action, double prob_one) {
  nn::Vector g(state.size() + 1);
  const double c = (action ? 1.0 : 0.0) - prob_one;
  g.head(state.size()) = c * state;
  g(state.size()) = c;
  return g;
}

/// Gradient ascent: theta += lr * ascent_grad, routed through sgd_step.
inline void ascend(LinearSigmoidPolicy& policy, const nn::Vector& ascent_grad, double lr) {
  nn::ParamSet& p = policy.params();
  const Eigen::Index dim = policy.state_dim();
  p.grad(0).col(0) = -ascent_grad.head(dim);
  p.grad(1)(0, 0) = -ascent_grad(dim);
  nn::sgd_step(p, lr);
}

}  // namespace hrlme

#endif  // HRLME_POLICY_HPP
