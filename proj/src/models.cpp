#include "woodnet/models.hpp"

#include <cmath>

#include "woodnet/rng.hpp"

namespace woodnet {

WoodNetOptions woodnet_mini_options() {
  WoodNetOptions o;
  o.input_size = 32;
  o.channels = {16, 32, 64};
  o.hidden = {512, 256};
  return o;
}

std::vector<std::string> class_names_for(std::size_t num_classes) {
  if (num_classes == default_class_names().size()) return default_class_names();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < num_classes; ++i) names.push_back("class" + std::to_string(i));
  return names;
}

NetworkSpec woodnet_spec(const WoodNetOptions& options) {
  if (options.channels.empty() || options.hidden.empty())
    throw ConfigError("woodnet needs at least one conv block and one hidden layer");
  NetworkSpec spec;
  spec.name = "woodnet";
  spec.input_shape = {options.input_channels, options.input_size, options.input_size};
  spec.class_names = options.class_names;

  std::size_t ch = options.input_channels;
  std::size_t side = options.input_size;
  for (std::size_t out : options.channels) {
    spec.layers.push_back(LayerDesc::conv2d(ch, out, 3, 1, 1));
    spec.layers.push_back(LayerDesc::maxpool2d());
    spec.layers.push_back(LayerDesc::relu());
    ch = out;
    side /= 2;
  }
  spec.layers.push_back(LayerDesc::flatten());
  std::size_t features = ch * side * side;
  for (std::size_t i = 0; i < options.hidden.size(); ++i) {
    spec.layers.push_back(LayerDesc::linear(features, options.hidden[i]));
    spec.layers.push_back(LayerDesc::relu());
    const bool last_hidden = i + 1 == options.hidden.size();
    if (options.dropout_p > 0.0 && (last_hidden || options.dropout_every_hidden))
      spec.layers.push_back(LayerDesc::dropout(options.dropout_p));
    features = options.hidden[i];
  }
  spec.layers.push_back(LayerDesc::linear(features, options.class_names.size()));
  infer_shapes(spec);
  return spec;
}

NetworkSpec badnet_spec(std::size_t input_size, std::size_t hidden,
                        std::vector<std::string> class_names) {
  NetworkSpec spec;
  spec.name = "badnet";
  spec.input_shape = {3, input_size, input_size};
  spec.class_names = std::move(class_names);
  spec.layers = {LayerDesc::flatten(), LayerDesc::linear(3 * input_size * input_size, hidden),
                 LayerDesc::relu(), LayerDesc::linear(hidden, spec.class_names.size())};
  infer_shapes(spec);
  return spec;
}

namespace {

std::size_t fan_in(const LayerDesc& d) {
  return d.kind == LayerKind::conv2d ? d.in * d.kernel * d.kernel : d.in;
}

template <typename T>
void init_layer(Layer<T>& layer, Rng& rng) {
  auto params = layer.params();
  if (params.empty()) return;
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in(layer.desc())));
  for (auto& w : params[0]->value.values()) w = static_cast<T>(uniform(rng, -bound, bound));
  for (std::size_t i = 1; i < params.size(); ++i) params[i]->value.fill(T(0));
}

}  // namespace

template <typename T>
void init_weights(Network<T>& network, std::uint64_t seed) {
  for (std::size_t i = 0; i < network.num_layers(); ++i) {
    Rng rng = make_rng(seed, StreamPurpose::init, {i});
    init_layer(network.layer(i), rng);
  }
}

template void init_weights(Network<float>&, std::uint64_t);
template void init_weights(Network<double>&, std::uint64_t);

Network<float> build_woodnet(const WoodNetOptions& options, std::uint64_t seed) {
  Network<float> net(woodnet_spec(options), seed);
  init_weights(net, seed);
  return net;
}

Network<float> build_woodnet(std::size_t num_classes, double dropout_p, std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("woodnet needs at least two classes");
  WoodNetOptions o;
  o.dropout_p = dropout_p;
  o.class_names = class_names_for(num_classes);
  return build_woodnet(o, seed);
}

Network<float> build_badnet(std::size_t num_classes, std::uint64_t seed) {
  Network<float> net(badnet_spec(224, 256, class_names_for(num_classes)), seed);
  init_weights(net, seed);
  return net;
}

Network<float> adapt_for_transfer(const Network<float>& pretrained,
                                  std::vector<std::string> class_names, std::uint64_t seed,
                                  HeadInit head_init) {
  const std::size_t last = pretrained.num_layers() - 1;
  const LayerDesc& head = pretrained.layer(last).desc();
  if (head.kind != LayerKind::linear)
    throw ConfigError("adapt_for_transfer: final layer of " + pretrained.name() + " is " +
                      std::string(to_string(head.kind)) + ", expected linear");
  Network<float> adapted = pretrained;
  for (std::size_t i = 0; i < last; ++i) adapted.layer(i).set_trainable(false);

  auto fresh = make_layer<float>(LayerDesc::linear(head.in, class_names.size()));
  if (head_init == HeadInit::he_uniform) {
    Rng rng = make_rng(seed, StreamPurpose::head, {last});
    init_layer(*fresh, rng);
  }
  adapted.replace_layer(last, std::move(fresh), std::move(class_names));
  return adapted;
}

}  // namespace woodnet
