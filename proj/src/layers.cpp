#include "woodnet/layers.hpp"

#include "woodnet/rng.hpp"

namespace woodnet {

namespace {

constexpr std::pair<LayerKind, std::string_view> kKindNames[] = {
    {LayerKind::conv2d, "conv2d"}, {LayerKind::maxpool2d, "maxpool2d"},
    {LayerKind::relu, "relu"},     {LayerKind::linear, "linear"},
    {LayerKind::dropout, "dropout"}, {LayerKind::flatten, "flatten"},
};

template <typename T>
void require_batch_rank(const BasicTensor<T>& x, std::size_t rank, std::string_view layer) {
  if (x.rank() != rank)
    throw ShapeError(std::string(layer) + ": expected rank-" + std::to_string(rank) +
                     " batch, got " + shape_string(x.shape()));
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

LayerDesc LayerDesc::conv2d(std::size_t in, std::size_t out, std::size_t kernel,
                            std::size_t stride, std::size_t padding) {
  LayerDesc d;
  d.kind = LayerKind::conv2d;
  d.in = in;
  d.out = out;
  d.kernel = kernel;
  d.stride = stride;
  d.padding = padding;
  return d;
}

LayerDesc LayerDesc::linear(std::size_t in, std::size_t out) {
  LayerDesc d;
  d.kind = LayerKind::linear;
  d.in = in;
  d.out = out;
  return d;
}

LayerDesc LayerDesc::maxpool2d() {
  LayerDesc d;
  d.kind = LayerKind::maxpool2d;
  return d;
}

LayerDesc LayerDesc::relu() { return LayerDesc{}; }

LayerDesc LayerDesc::flatten() {
  LayerDesc d;
  d.kind = LayerKind::flatten;
  return d;
}

LayerDesc LayerDesc::dropout(double p) {
  LayerDesc d;
  d.kind = LayerKind::dropout;
  d.p = p;
  return d;
}

nlohmann::json LayerDesc::to_json() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind));
  j["trainable"] = trainable;
  switch (kind) {
    case LayerKind::conv2d:
      j["kernel"] = kernel;
      j["stride"] = stride;
      j["padding"] = padding;
      [[fallthrough]];
    case LayerKind::linear:
      j["in"] = in;
      j["out"] = out;
      break;
    case LayerKind::dropout:
      j["p"] = p;
      break;
    default:
      break;
  }
  return j;
}

LayerDesc LayerDesc::from_json(const nlohmann::json& j) {
  LayerDesc d;
  d.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  d.trainable = j.value("trainable", true);
  switch (d.kind) {
    case LayerKind::conv2d:
      d.kernel = j.at("kernel").get<std::size_t>();
      d.stride = j.at("stride").get<std::size_t>();
      d.padding = j.at("padding").get<std::size_t>();
      [[fallthrough]];
    case LayerKind::linear:
      d.in = j.at("in").get<std::size_t>();
      d.out = j.at("out").get<std::size_t>();
      break;
    case LayerKind::dropout:
      d.p = j.at("p").get<double>();
      break;
    default:
      break;
  }
  return d;
}

Shape output_shape(const LayerDesc& desc, const Shape& sample) {
  switch (desc.kind) {
    case LayerKind::conv2d: {
      if (sample.size() != 3 || sample[0] != desc.in)
        throw ShapeError("conv2d expects " + std::to_string(desc.in) + "×H×W, got " +
                         shape_string(sample));
      ConvGeometry geo{sample[0], sample[1], sample[2], desc.kernel, desc.kernel, desc.stride,
                       desc.padding};
      geo.validate();
      return {desc.out, geo.out_height(), geo.out_width()};
    }
    case LayerKind::maxpool2d:
      if (sample.size() != 3 || sample[1] % 2 != 0 || sample[2] % 2 != 0)
        throw ShapeError("maxpool2d needs C×H×W with even H and W, got " + shape_string(sample));
      return {sample[0], sample[1] / 2, sample[2] / 2};
    case LayerKind::linear:
      if (sample.size() != 1 || sample[0] != desc.in)
        throw ShapeError("linear expects " + std::to_string(desc.in) + " features, got " +
                         shape_string(sample));
      return {desc.out};
    case LayerKind::flatten:
      return {shape_size(sample)};
    case LayerKind::relu:
    case LayerKind::dropout:
      break;
  }
  return sample;
}

template <typename T>
Shape Layer<T>::output_shape(const Shape& sample) const {
  return woodnet::output_shape(desc_, sample);
}

template <typename T>
void Layer<T>::require_forward(bool cached) const {
  if (!cached)
    throw StateError(std::string(to_string(desc_.kind)) + ": backward called before forward");
}

// --- Conv2d ---------------------------------------------------------------

template <typename T>
Conv2d<T>::Conv2d(const LayerDesc& desc)
    : Layer<T>(desc),
      weight_("weight", {desc.out, desc.in, desc.kernel, desc.kernel}),
      bias_("bias", {desc.out}) {
  if (desc.kind != LayerKind::conv2d) throw ConfigError("Conv2d built from a non-conv descriptor");
  if (desc.stride == 0) throw ConfigError("conv2d: stride must be positive");
}

template <typename T>
BasicTensor<T> Conv2d<T>::forward(const BasicTensor<T>& x, const ForwardContext&) {
  require_batch_rank(x, 4, "conv2d");
  auto y = kernels::conv2d_forward(x, weight_.value, bias_.value, this->desc_.stride,
                                   this->desc_.padding);
  input_ = x;
  cached_ = true;
  return y;
}

template <typename T>
BasicTensor<T> Conv2d<T>::backward(const BasicTensor<T>& grad_out) {
  this->require_forward(cached_);
  auto g = kernels::conv2d_backward(input_, weight_.value, grad_out, this->desc_.stride,
                                    this->desc_.padding);
  if (this->trainable()) {
    for (std::size_t i = 0; i < g.weight.size(); ++i) weight_.grad[i] += g.weight[i];
    for (std::size_t i = 0; i < g.bias.size(); ++i) bias_.grad[i] += g.bias[i];
    weight_.grad_ready = bias_.grad_ready = true;
  }
  return std::move(g.input);
}

// --- MaxPool2d ------------------------------------------------------------

template <typename T>
BasicTensor<T> MaxPool2d<T>::forward(const BasicTensor<T>& x, const ForwardContext&) {
  auto y = kernels::maxpool2x2_forward(x, argmax_);
  input_shape_ = x.shape();
  cached_ = true;
  return y;
}

template <typename T>
BasicTensor<T> MaxPool2d<T>::backward(const BasicTensor<T>& grad_out) {
  this->require_forward(cached_);
  if (grad_out.size() != argmax_.size())
    throw ShapeError("maxpool2d backward: gradient " + shape_string(grad_out.shape()) +
                     " does not match cached forward");
  BasicTensor<T> grad_in(input_shape_);
  for (std::size_t i = 0; i < argmax_.size(); ++i) grad_in[argmax_[i]] += grad_out[i];
  return grad_in;
}

// --- ReLU -----------------------------------------------------------------

template <typename T>
BasicTensor<T> ReLU<T>::forward(const BasicTensor<T>& x, const ForwardContext&) {
  BasicTensor<T> y(x.shape());
  const std::size_t n = x.size();
#pragma omp parallel for schedule(static) if (n >= (1u << 16))
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  input_ = x;
  cached_ = true;
  return y;
}

template <typename T>
BasicTensor<T> ReLU<T>::backward(const BasicTensor<T>& grad_out) {
  this->require_forward(cached_);
  if (grad_out.shape() != input_.shape())
    throw ShapeError("relu backward: gradient shape mismatch");
  BasicTensor<T> g(grad_out.shape());
  const std::size_t n = g.size();
#pragma omp parallel for schedule(static) if (n >= (1u << 16))
  for (std::size_t i = 0; i < n; ++i) g[i] = input_[i] > T(0) ? grad_out[i] : T(0);
  return g;
}

// --- Linear ---------------------------------------------------------------

template <typename T>
Linear<T>::Linear(const LayerDesc& desc)
    : Layer<T>(desc), weight_("weight", {desc.out, desc.in}), bias_("bias", {desc.out}) {
  if (desc.kind != LayerKind::linear) throw ConfigError("Linear built from a non-linear descriptor");
}

template <typename T>
BasicTensor<T> Linear<T>::forward(const BasicTensor<T>& x, const ForwardContext&) {
  require_batch_rank(x, 2, "linear");
  const std::size_t batch = x.dim(0), in = this->desc_.in, out = this->desc_.out;
  if (x.dim(1) != in)
    throw ShapeError("linear: input " + shape_string(x.shape()) + " vs weights " +
                     shape_string(weight_.value.shape()));
  BasicTensor<T> y({batch, out});
  kernels::gemm(Trans::no, Trans::yes, batch, out, in, x.data(), weight_.value.data(), y.data());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out; ++o) y[b * out + o] += bias_.value[o];
  input_ = x;
  cached_ = true;
  return y;
}

template <typename T>
BasicTensor<T> Linear<T>::backward(const BasicTensor<T>& grad_out) {
  this->require_forward(cached_);
  const std::size_t batch = input_.dim(0), in = this->desc_.in, out = this->desc_.out;
  if (grad_out.shape() != Shape{batch, out})
    throw ShapeError("linear backward: gradient " + shape_string(grad_out.shape()) +
                     ", expected " + shape_string({batch, out}));
  if (this->trainable()) {
    kernels::gemm(Trans::yes, Trans::no, out, in, batch, grad_out.data(), input_.data(),
                  weight_.grad.data(), true);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < out; ++o) bias_.grad[o] += grad_out[b * out + o];
    weight_.grad_ready = bias_.grad_ready = true;
  }
  BasicTensor<T> grad_in({batch, in});
  kernels::gemm(Trans::no, Trans::no, batch, in, out, grad_out.data(), weight_.value.data(),
                grad_in.data());
  return grad_in;
}

// --- Dropout --------------------------------------------------------------

template <typename T>
Dropout<T>::Dropout(const LayerDesc& desc) : Layer<T>(desc) {
  if (!(desc.p >= 0.0 && desc.p < 1.0))
    throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(desc.p));
}

template <typename T>
BasicTensor<T> Dropout<T>::forward(const BasicTensor<T>& x, const ForwardContext& ctx) {
  cached_ = true;
  if (ctx.mode == Mode::eval || p() == 0.0) {
    mask_.clear();
    return x;
  }
  Rng rng = make_rng(ctx.seed, StreamPurpose::dropout, {ctx.layer_index, ctx.step});
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p()));
  mask_.resize(x.size());
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = unit_uniform(rng) < p() ? T(0) : keep_scale;
    y[i] = x[i] * mask_[i];
  }
  return y;
}

template <typename T>
BasicTensor<T> Dropout<T>::backward(const BasicTensor<T>& grad_out) {
  this->require_forward(cached_);
  if (mask_.empty()) return grad_out;
  if (grad_out.size() != mask_.size()) throw ShapeError("dropout backward: gradient shape mismatch");
  BasicTensor<T> g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * mask_[i];
  return g;
}

// --- Flatten --------------------------------------------------------------

template <typename T>
BasicTensor<T> Flatten<T>::forward(const BasicTensor<T>& x, const ForwardContext&) {
  if (x.rank() < 2) throw ShapeError("flatten: expected a batch, got " + shape_string(x.shape()));
  input_shape_ = x.shape();
  cached_ = true;
  return x.reshape({x.dim(0), x.size() / x.dim(0)});
}

template <typename T>
BasicTensor<T> Flatten<T>::backward(const BasicTensor<T>& grad_out) {
  this->require_forward(cached_);
  return grad_out.reshape(input_shape_);
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerDesc& desc) {
  std::unique_ptr<Layer<T>> layer;
  switch (desc.kind) {
    case LayerKind::conv2d: layer = std::make_unique<Conv2d<T>>(desc); break;
    case LayerKind::maxpool2d: layer = std::make_unique<MaxPool2d<T>>(); break;
    case LayerKind::relu: layer = std::make_unique<ReLU<T>>(); break;
    case LayerKind::linear: layer = std::make_unique<Linear<T>>(desc); break;
    case LayerKind::dropout: layer = std::make_unique<Dropout<T>>(desc); break;
    case LayerKind::flatten: layer = std::make_unique<Flatten<T>>(); break;
  }
  layer->set_trainable(desc.trainable);
  return layer;
}

#define WOODNET_INSTANTIATE_LAYERS(T)  \
  template class Layer<T>;             \
  template class Conv2d<T>;            \
  template class MaxPool2d<T>;         \
  template class ReLU<T>;              \
  template class Linear<T>;            \
  template class Dropout<T>;           \
  template class Flatten<T>;           \
  template std::unique_ptr<Layer<T>> make_layer<T>(const LayerDesc&);

WOODNET_INSTANTIATE_LAYERS(float)
WOODNET_INSTANTIATE_LAYERS(double)

}  // namespace woodnet
