#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "woodnet/network.hpp"

namespace woodnet {

inline constexpr std::string_view kCheckpointMagic = "WOODNET1";

// Per-channel input statistics in [0, 1] pixel units; inputs are fed to the
// network as (x - mean) / std.
struct Normalization {
  std::vector<double> mean{0.0, 0.0, 0.0};
  std::vector<double> std{1.0, 1.0, 1.0};

  bool operator==(const Normalization&) const = default;
};

struct TrainingMeta {
  std::size_t epoch = 0;
  double best_val_accuracy = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const TrainingMeta&) const = default;
};

struct Checkpoint {
  Network<float> network;
  Normalization normalization;
  TrainingMeta meta;
};

// WOODNET1 | u32-LE header length | canonical JSON header | float32-LE
// parameters in layer order, weight before bias.
std::vector<std::uint8_t> encode_checkpoint(const Network<float>& network,
                                            const Normalization& normalization,
                                            const TrainingMeta& meta);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Network<float>& network,
                     const Normalization& normalization, const TrainingMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace woodnet
