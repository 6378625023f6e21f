#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "woodnet/layers.hpp"

namespace woodnet {

inline const std::vector<std::string>& default_class_names() {
  static const std::vector<std::string> names{"Kjartan", "Lars", "Morgan", "Other"};
  return names;
}

struct NetworkSpec {
  std::string name;
  std::vector<LayerDesc> layers;
  Shape input_shape;  // C×H×W
  std::vector<std::string> class_names = default_class_names();

  nlohmann::json to_json() const;
  static NetworkSpec from_json(const nlohmann::json& j);

  bool operator==(const NetworkSpec&) const = default;
};

// Shapes of every intermediate per-sample tensor, starting with the input.
// Throws ShapeError on the first incompatible layer, and when the last layer
// does not emit one logit per class.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

// A sequential stack of layers. Single owner during training; copies are
// deep and independent, so read-only clones can run inference concurrently.
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec, std::uint64_t seed = 0);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  // Current spec, including per-layer trainable flags.
  NetworkSpec spec() const;
  const std::string& name() const { return spec_.name; }
  const std::vector<std::string>& class_names() const { return spec_.class_names; }
  const Shape& input_shape() const { return spec_.input_shape; }
  std::size_t num_classes() const { return spec_.class_names.size(); }

  std::size_t num_layers() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }

  // Replaces layer i; the new layer must keep the same output shape
  // unless it is the last layer and class names are updated alongside.
  void replace_layer(std::size_t i, std::unique_ptr<Layer<T>> layer,
                     std::vector<std::string> class_names);

  // Input batch B×C×H×W -> logits B×classes. Train mode enables dropout.
  BasicTensor<T> forward(const BasicTensor<T>& batch, Mode mode);
  // Backpropagates the logit gradient, stopping below the lowest trainable
  // layer since nothing underneath can use the signal.
  void backward(const BasicTensor<T>& grad_logits);

  void zero_grad();
  // Every parameter in layer order, weight before bias.
  std::vector<ParamSlot<T>*> parameters();
  std::vector<const ParamSlot<T>*> parameters() const;
  std::size_t parameter_count() const;

  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  // Dropout masks are keyed on this counter; the trainer bumps it per step.
  std::uint64_t step() const { return step_; }
  void advance_step() { ++step_; }

 private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::uint64_t seed_ = 0;
  std::uint64_t step_ = 0;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace woodnet
