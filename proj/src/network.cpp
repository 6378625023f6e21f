#include "woodnet/network.hpp"

namespace woodnet {

nlohmann::json NetworkSpec::to_json() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto& l : layers) layers_json.push_back(l.to_json());
  return {{"name", name},
          {"layers", layers_json},
          {"input_shape", input_shape},
          {"class_names", class_names}};
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  spec.name = j.at("name").get<std::string>();
  for (const auto& l : j.at("layers")) spec.layers.push_back(LayerDesc::from_json(l));
  spec.input_shape = j.at("input_shape").get<Shape>();
  spec.class_names = j.at("class_names").get<std::vector<std::string>>();
  return spec;
}

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
  if (spec.input_shape.size() != 3)
    throw ShapeError("network input must be C×H×W, got " + shape_string(spec.input_shape));
  if (spec.class_names.size() < 2) throw ConfigError("a classifier needs at least two classes");
  std::vector<Shape> shapes{spec.input_shape};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    try {
      shapes.push_back(output_shape(spec.layers[i], shapes.back()));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + " of " + spec.name + ": " + e.what());
    }
  }
  if (shapes.back() != Shape{spec.class_names.size()})
    throw ShapeError(spec.name + " emits " + shape_string(shapes.back()) + " but has " +
                     std::to_string(spec.class_names.size()) + " classes");
  return shapes;
}

template <typename T>
Network<T>::Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  infer_shapes(spec_);
  for (const auto& desc : spec_.layers) layers_.push_back(make_layer<T>(desc));
}

template <typename T>
Network<T>::Network(const Network& other)
    : spec_(other.spec_), seed_(other.seed_), step_(other.step_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) *this = Network(other);
  return *this;
}

template <typename T>
NetworkSpec Network<T>::spec() const {
  NetworkSpec s = spec_;
  for (std::size_t i = 0; i < layers_.size(); ++i) s.layers[i] = layers_[i]->desc();
  return s;
}

template <typename T>
void Network<T>::replace_layer(std::size_t i, std::unique_ptr<Layer<T>> layer,
                               std::vector<std::string> class_names) {
  NetworkSpec candidate = spec();
  candidate.layers.at(i) = layer->desc();
  candidate.class_names = std::move(class_names);
  infer_shapes(candidate);
  layers_[i] = std::move(layer);
  spec_ = std::move(candidate);
}

template <typename T>
BasicTensor<T> Network<T>::forward(const BasicTensor<T>& batch, Mode mode) {
  if (batch.rank() != 4 || Shape(batch.shape().begin() + 1, batch.shape().end()) != spec_.input_shape)
    throw ShapeError(spec_.name + ": expected B×" + shape_string(spec_.input_shape) + " input, got " +
                     shape_string(batch.shape()));
  ForwardContext ctx{mode, seed_, step_, 0};
  BasicTensor<T> x = layers_.front()->forward(batch, ctx);
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    ctx.layer_index = i;
    x = layers_[i]->forward(x, ctx);
  }
  return x;
}

template <typename T>
void Network<T>::backward(const BasicTensor<T>& grad_logits) {
  std::size_t lowest = layers_.size();
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i]->trainable() && !layers_[i]->params().empty()) {
      lowest = i;
      break;
    }
  BasicTensor<T> g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > lowest;) {
    if (i == lowest) {
      layers_[i]->backward(g);
      break;
    }
    g = layers_[i]->backward(g);
  }
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
std::vector<ParamSlot<T>*> Network<T>::parameters() {
  std::vector<ParamSlot<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->params()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<const ParamSlot<T>*> Network<T>::parameters() const {
  std::vector<const ParamSlot<T>*> out;
  for (const auto& l : layers_)
    for (auto* p : l->params()) out.push_back(p);
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

template class Network<float>;
template class Network<double>;

}  // namespace woodnet
