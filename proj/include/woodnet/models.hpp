#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "woodnet/network.hpp"

namespace woodnet {

// Knobs for the WoodNet family. Defaults give the full 224×224 network: five
// conv(3×3, pad 1) -> maxpool(2×2) -> ReLU blocks, then 3136 -> 2048 -> 1024
// -> classes with a single dropout before the last linear layer.
struct WoodNetOptions {
  std::size_t input_size = 224;
  std::size_t input_channels = 3;
  std::vector<std::size_t> channels{16, 32, 64, 64, 64};
  std::vector<std::size_t> hidden{2048, 1024};
  double dropout_p = 0.5;
  // Also put dropout after every earlier hidden layer, not just the last one.
  bool dropout_every_hidden = false;
  std::vector<std::string> class_names = default_class_names();
};

// Desk-scale WoodNet: 32×32 input, three blocks (3->16->32->64), classifier
// 1024 -> 512 -> 256 -> classes.
WoodNetOptions woodnet_mini_options();

std::vector<std::string> class_names_for(std::size_t num_classes);

NetworkSpec woodnet_spec(const WoodNetOptions& options = {});
// Flatten -> linear(C·S·S -> hidden) -> ReLU -> linear(hidden -> classes).
NetworkSpec badnet_spec(std::size_t input_size = 224, std::size_t hidden = 256,
                        std::vector<std::string> class_names = default_class_names());

// Uniform(-b, b) weights with b = sqrt(6 / fan_in), zero biases. Each layer
// draws from its own stream keyed on (seed, layer index).
template <typename T>
void init_weights(Network<T>& network, std::uint64_t seed);

Network<float> build_woodnet(std::size_t num_classes = 4, double dropout_p = 0.5,
                             std::uint64_t seed = 0);
Network<float> build_woodnet(const WoodNetOptions& options, std::uint64_t seed = 0);
Network<float> build_badnet(std::size_t num_classes = 4, std::uint64_t seed = 0);

// Initial weights of the replacement head; biases always start at zero.
enum class HeadInit { zeros, he_uniform };

// Freezes every layer of `pretrained` and swaps its final linear layer for a
// fresh one with `class_names.size()` outputs. Throws ConfigError when the
// last layer is not linear.
Network<float> adapt_for_transfer(const Network<float>& pretrained,
                                  std::vector<std::string> class_names = default_class_names(),
                                  std::uint64_t seed = 0, HeadInit head_init = HeadInit::zeros);

}  // namespace woodnet
