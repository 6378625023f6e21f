#include "woodnet/optim.hpp"

#include <algorithm>
#include <cmath>

namespace woodnet {

namespace {

template <typename T>
void check_logits(const BasicTensor<T>& logits) {
  if (logits.rank() != 2)
    throw ShapeError("expected B×M logits, got " + shape_string(logits.shape()));
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (std::isnan(logits[i])) throw DomainError("NaN logit at index " + std::to_string(i));
}

}  // namespace

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  check_logits(logits);
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  BasicTensor<T> out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = logits.data() + r * cols;
    T* y = out.data() + r * cols;
    const T peak = *std::max_element(x, x + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += (y[c] = std::exp(x[c] - peak));
    for (std::size_t c = 0; c < cols; ++c) y[c] /= total;
  }
  return out;
}

template <typename T>
LossResult<T> cross_entropy(const BasicTensor<T>& logits, std::span<const std::size_t> labels) {
  check_logits(logits);
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  if (labels.size() != rows)
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(rows) + " rows");
  for (std::size_t i = 0; i < rows; ++i)
    if (labels[i] >= cols)
      throw InputError("cross_entropy: label " + std::to_string(labels[i]) + " at index " +
                       std::to_string(i) + " outside [0, " + std::to_string(cols) + ")");

  LossResult<T> r{T(0), BasicTensor<T>(logits.shape()), BasicTensor<T>(logits.shape())};
  const T inv_n = T(1) / static_cast<T>(rows);
  T total = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const T* x = logits.data() + i * cols;
    T* p = r.probabilities.data() + i * cols;
    T* g = r.grad_logits.data() + i * cols;
    const T peak = *std::max_element(x, x + cols);
    T sum = 0;
    for (std::size_t c = 0; c < cols; ++c) sum += (p[c] = std::exp(x[c] - peak));
    // -log p_label = log(sum exp(x - peak)) - (x_label - peak)
    total += std::log(sum) - (x[labels[i]] - peak);
    for (std::size_t c = 0; c < cols; ++c) {
      p[c] /= sum;
      g[c] = (p[c] - (c == labels[i] ? T(1) : T(0))) * inv_n;
    }
  }
  r.mean_loss = std::max(T(0), total * inv_n);
  return r;
}

template <typename T>
Adam<T>::Adam(AdamConfig config) : config_(config) {
  if (!(config.learning_rate > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0))
    throw ConfigError("adam: betas must lie in [0, 1)");
}

template <typename T>
void Adam<T>::step(std::span<ParamSlot<T>* const> params) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  } else if (m_.size() != params.size()) {
    throw StateError("adam: parameter list changed size between steps");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamSlot<T>& slot = *params[i];
    if (slot.value.shape() != m_[i].shape())
      throw StateError("adam: parameter '" + slot.name + "' changed shape");
    if (slot.trainable && !slot.grad_ready)
      throw StateError("adam: trainable parameter '" + slot.name + "' (#" + std::to_string(i) +
                       ") has no populated gradient");
  }

  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamSlot<T>& slot = *params[i];
    if (!slot.trainable) continue;
    T* theta = slot.value.data();
    const T* g = slot.grad.data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    const std::size_t n = slot.value.size();
#pragma omp parallel for schedule(static) if (n >= (1u << 16))
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = g[k];
      const double mk = b1 * m[k] + (1.0 - b1) * gk;
      const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double m_hat = mk / correction1;
      const double v_hat = vk / correction2;
      theta[k] = static_cast<T>(theta[k] - config_.learning_rate * m_hat /
                                                 (std::sqrt(v_hat) + config_.epsilon));
    }
  }
}

template <typename T>
void sgd_step(std::span<ParamSlot<T>* const> params, double learning_rate) {
  for (auto* slot : params) {
    if (!slot->trainable) continue;
    for (std::size_t k = 0; k < slot->value.size(); ++k)
      slot->value[k] = static_cast<T>(slot->value[k] - learning_rate * slot->grad[k]);
  }
}

template class Adam<float>;
template class Adam<double>;
template BasicTensor<float> softmax(const BasicTensor<float>&);
template BasicTensor<double> softmax(const BasicTensor<double>&);
template LossResult<float> cross_entropy(const BasicTensor<float>&, std::span<const std::size_t>);
template LossResult<double> cross_entropy(const BasicTensor<double>&, std::span<const std::size_t>);
template void sgd_step(std::span<ParamSlot<float>* const>, double);
template void sgd_step(std::span<ParamSlot<double>* const>, double);

}  // namespace woodnet
