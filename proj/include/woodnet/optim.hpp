#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "woodnet/layers.hpp"

namespace woodnet {

template <typename T>
struct LossResult {
  T mean_loss = 0;              // nats, averaged over the batch
  BasicTensor<T> grad_logits;   // d(mean_loss)/d(logits), B×M
  BasicTensor<T> probabilities; // row-wise softmax, B×M
};

// Row-wise softmax of B×M logits, max-subtracted. NaN -> DomainError.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

// Mean negative log-likelihood of the true classes, fused with softmax so the
// loss uses log-sum-exp directly and never takes log(0).
template <typename T>
LossResult<T> cross_entropy(const BasicTensor<T>& logits, std::span<const std::size_t> labels);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moment estimates. Moments are allocated on the
// first step and tied to the parameter list by position.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  // Updates every trainable slot; frozen slots and their moments are left
  // untouched. Throws StateError if a trainable slot has no fresh gradient.
  void step(std::span<ParamSlot<T>* const> params);

  std::size_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<BasicTensor<T>>& first_moments() const { return m_; }
  const std::vector<BasicTensor<T>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<BasicTensor<T>> m_;
  std::vector<BasicTensor<T>> v_;
};

// Plain gradient descent: theta <- theta - lr * g on trainable slots.
template <typename T>
void sgd_step(std::span<ParamSlot<T>* const> params, double learning_rate);

}  // namespace woodnet
