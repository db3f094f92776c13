#include "hrlme/nnkit.hpp"

namespace hrlme::nn {

PoolResult conv3_maxpool(const Matrix& input, const Matrix& filters, const Vector& bias) {
  const Eigen::Index rows = input.rows();
  const Eigen::Index dim = input.cols();
  if (rows < 3) {
    throw std::invalid_argument("conv3_maxpool: need at least 3 rows, got " + std::to_string(rows));
  }
  if (filters.cols() != 3 * dim || filters.rows() != bias.size()) {
    throw std::invalid_argument("conv3_maxpool: filter shape " + std::to_string(filters.rows()) + "x" +
                                std::to_string(filters.cols()) + " does not match input width " +
                                std::to_string(dim) + " and bias " + std::to_string(bias.size()));
  }
  const Eigen::Index windows = rows - 2;
  Matrix responses = input.topRows(windows) * filters.leftCols(dim).transpose();
  responses.noalias() += input.middleRows(1, windows) * filters.middleCols(dim, dim).transpose();
  responses.noalias() += input.bottomRows(windows) * filters.rightCols(dim).transpose();

  PoolResult out;
  out.pooled.resize(filters.rows());
  out.argmax.assign(static_cast<std::size_t>(filters.rows()), 0);
  for (Eigen::Index f = 0; f < filters.rows(); ++f) {
    Eigen::Index best = 0;
    for (Eigen::Index w = 1; w < windows; ++w) {
      if (responses(w, f) > responses(best, f)) {
        best = w;
      }
    }
    out.argmax[static_cast<std::size_t>(f)] = best;
    out.pooled(f) = responses(best, f) + bias(f);
  }
  return out;
}

void conv3_maxpool_backward(const Matrix& input, const Matrix& filters,
                            const std::vector<Eigen::Index>& argmax, const Vector& d_pooled,
                            Matrix& d_filters, Vector& d_bias, Matrix& d_input) {
  const Eigen::Index dim = input.cols();
  for (Eigen::Index f = 0; f < filters.rows(); ++f) {
    const double g = d_pooled(f);
    if (g == 0.0) {
      continue;
    }
    const Eigen::Index w = argmax[static_cast<std::size_t>(f)];
    d_bias(f) += g;
    for (Eigen::Index o = 0; o < 3; ++o) {
      d_filters.row(f).segment(o * dim, dim) += g * input.row(w + o);
      d_input.row(w + o) += g * filters.row(f).segment(o * dim, dim);
    }
  }
}

std::size_t ParamSet::add(const std::string& name, Matrix value) {
  if (contains(name)) {
    throw std::invalid_argument("ParamSet: duplicate entry '" + name + "'");
  }
  Matrix grad = Matrix::Zero(value.rows(), value.cols());
  entries_.push_back(Entry{name, std::move(value), std::move(grad)});
  index_.emplace(name, entries_.size() - 1);
  return entries_.size() - 1;
}

std::size_t ParamSet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("ParamSet: no entry '" + name + "'");
  }
  return it->second;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) {
    e.grad.setZero();
  }
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    n += static_cast<std::size_t>(e.value.size());
  }
  return n;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols() ||
        a.value != b.value) {
      return false;
    }
  }
  return true;
}

void sgd_step(ParamSet& params, double lr) {
  for (auto& e : params) {
    if (!e.grad.allFinite()) {
      throw std::runtime_error("sgd_step: non-finite gradient in '" + e.name + "'");
    }
  }
  for (auto& e : params) {
    if (lr != 0.0) {
      e.value.noalias() -= lr * e.grad;
    }
    e.grad.setZero();
  }
}

namespace {

std::vector<Matrix> analytic_grads(const LossFn& loss_fn, ParamSet& params) {
  params.zero_grad();
  loss_fn(params);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& e : params) {
    analytic.push_back(e.grad);
  }
  return analytic;
}

double coordinate_error(const LossFn& loss_fn, ParamSet& params, const std::vector<Matrix>& analytic,
                        std::size_t which, std::size_t flat, double eps) {
  double& theta = params.value(which).data()[flat];
  const double saved = theta;
  theta = saved + eps;
  const double up = loss_fn(params);
  theta = saved - eps;
  const double down = loss_fn(params);
  theta = saved;

  const double numeric = (up - down) / (2.0 * eps);
  const double exact = analytic[which].data()[flat];
  const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
  return std::abs(exact - numeric) / denom;
}

}  // namespace

double finite_diff_check(const LossFn& loss_fn, ParamSet& params, double eps, std::size_t n_coords,
                         std::uint64_t seed) {
  const std::vector<Matrix> analytic = analytic_grads(loss_fn, params);
  const std::size_t total = params.total_size();
  if (total == 0) {
    return 0.0;
  }
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < n_coords; ++k) {
    std::size_t flat = rng.index(total);
    std::size_t which = 0;
    while (flat >= static_cast<std::size_t>(params.value(which).size())) {
      flat -= static_cast<std::size_t>(params.value(which).size());
      ++which;
    }
    worst = std::max(worst, coordinate_error(loss_fn, params, analytic, which, flat, eps));
  }
  params.zero_grad();
  return worst;
}

double finite_diff_check_entry(const LossFn& loss_fn, ParamSet& params, std::size_t entry, double eps) {
  const std::vector<Matrix> analytic = analytic_grads(loss_fn, params);
  const auto n = static_cast<std::size_t>(params.value(entry).size());
  double worst = 0.0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    worst = std::max(worst, coordinate_error(loss_fn, params, analytic, entry, flat, eps));
  }
  params.zero_grad();
  return worst;
}

void fill_uniform(Matrix& m, double scale, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-scale, scale);
  }
}

}  // namespace hrlme::nn
