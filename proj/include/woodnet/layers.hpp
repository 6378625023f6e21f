#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "woodnet/kernels.hpp"
#include "woodnet/tensor.hpp"

namespace woodnet {

enum class LayerKind { conv2d, maxpool2d, relu, linear, dropout, flatten };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

// Declarative description of one layer; enough to rebuild it.
struct LayerDesc {
  LayerKind kind = LayerKind::relu;
  std::size_t in = 0;   // conv: input channels, linear: input features
  std::size_t out = 0;  // conv: output channels, linear: output features
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  double p = 0.0;  // dropout probability
  bool trainable = true;

  static LayerDesc conv2d(std::size_t in, std::size_t out, std::size_t kernel = 3,
                          std::size_t stride = 1, std::size_t padding = 1);
  static LayerDesc linear(std::size_t in, std::size_t out);
  static LayerDesc maxpool2d();
  static LayerDesc relu();
  static LayerDesc flatten();
  static LayerDesc dropout(double p);

  nlohmann::json to_json() const;
  static LayerDesc from_json(const nlohmann::json& j);

  bool operator==(const LayerDesc&) const = default;
};

// Shape of one output sample given one input sample (no batch axis).
// Throws ShapeError when the layer cannot accept `sample`.
Shape output_shape(const LayerDesc& desc, const Shape& sample);

enum class Mode { train, eval };

struct ForwardContext {
  Mode mode = Mode::eval;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::size_t layer_index = 0;
};

template <typename T>
struct ParamSlot {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  // Set by backward, cleared by zero_grad; optimizers refuse to step otherwise.
  bool grad_ready = false;
  // Mirrors the owning layer; frozen slots never change.
  bool trainable = true;

  ParamSlot(std::string n, Shape shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}
  void zero_grad() {
    grad.fill(T(0));
    grad_ready = false;
  }
};

// A differentiable layer. forward caches what backward needs; backward
// accumulates into parameter gradients unless the layer is frozen.
template <typename T>
class Layer {
 public:
  explicit Layer(LayerDesc desc) : desc_(desc) {}
  virtual ~Layer() = default;

  const LayerDesc& desc() const { return desc_; }
  LayerKind kind() const { return desc_.kind; }
  bool trainable() const { return desc_.trainable; }
  void set_trainable(bool on) {
    desc_.trainable = on;
    for (auto* p : params()) p->trainable = on;
  }

  virtual BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) = 0;
  virtual BasicTensor<T> backward(const BasicTensor<T>& grad_out) = 0;

  Shape output_shape(const Shape& sample) const;

  virtual std::vector<ParamSlot<T>*> params() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  void require_forward(bool cached) const;

  LayerDesc desc_;
};

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  explicit Conv2d(const LayerDesc& desc);
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::vector<ParamSlot<T>*> params() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2d>(*this); }

  ParamSlot<T>& weight() { return weight_; }
  ParamSlot<T>& bias() { return bias_; }

 private:
  ParamSlot<T> weight_;
  ParamSlot<T> bias_;
  BasicTensor<T> input_;
  bool cached_ = false;
};

template <typename T>
class MaxPool2d final : public Layer<T> {
 public:
  MaxPool2d() : Layer<T>(LayerDesc::maxpool2d()) {}
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool2d>(*this); }

 private:
  Shape input_shape_;
  std::vector<std::uint32_t> argmax_;
  bool cached_ = false;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  ReLU() : Layer<T>(LayerDesc::relu()) {}
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ReLU>(*this); }

 private:
  BasicTensor<T> input_;
  bool cached_ = false;
};

template <typename T>
class Linear final : public Layer<T> {
 public:
  explicit Linear(const LayerDesc& desc);
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::vector<ParamSlot<T>*> params() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Linear>(*this); }

  ParamSlot<T>& weight() { return weight_; }
  ParamSlot<T>& bias() { return bias_; }

 private:
  ParamSlot<T> weight_;  // out × in
  ParamSlot<T> bias_;
  BasicTensor<T> input_;
  bool cached_ = false;
};

// Inverted dropout: survivors are scaled by 1/(1-p) at train time, eval is
// the identity. The mask depends only on (seed, layer index, step).
template <typename T>
class Dropout final : public Layer<T> {
 public:
  explicit Dropout(const LayerDesc& desc);
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

  double p() const { return this->desc_.p; }

 private:
  std::vector<T> mask_;  // empty after an eval-mode forward
  bool cached_ = false;
};

template <typename T>
class Flatten final : public Layer<T> {
 public:
  Flatten() : Layer<T>(LayerDesc::flatten()) {}
  BasicTensor<T> forward(const BasicTensor<T>& x, const ForwardContext& ctx) override;
  BasicTensor<T> backward(const BasicTensor<T>& grad_out) override;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  Shape input_shape_;
  bool cached_ = false;
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerDesc& desc);

}  // namespace woodnet
