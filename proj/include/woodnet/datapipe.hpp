#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "woodnet/checkpoint.hpp"
#include "woodnet/tensor.hpp"

namespace woodnet {

inline constexpr std::string_view kDatasetMagic = "WOODSET1";

// Seeded sampling without replacement down to n = min(counts). Returns, per
// class, the selected item indices in ascending order.
std::vector<std::vector<std::size_t>> balance_classes(std::span<const std::size_t> counts,
                                                      std::uint64_t seed);

// Each original contributes itself plus `replicas` augmented variants.
constexpr std::size_t expanded_count(std::size_t originals, std::size_t replicas) {
  return originals * (replicas + 1);
}

struct SplitFractions {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;

  // Parses "0.70,0.15,0.15". Throws ConfigError unless three non-negative
  // values summing to 1 (within 1e-9).
  static SplitFractions parse(std::string_view text);
  void validate() const;
};

// Sample indices per split, each sorted ascending.
struct SplitAssignment {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  const std::vector<std::size_t>& by_name(std::string_view name) const;
};

// Samples are numbered consecutively group by group (group g owns the
// group_sizes[g] indices after group g-1). Groups are shuffled with the seed
// and never straddle splits: round(train·G) groups go to train and the rest
// is divided between val and test in proportion, val rounded down.
SplitAssignment split_dataset(std::span<const std::size_t> group_sizes,
                              const SplitFractions& fractions, std::uint64_t seed);

// Per-channel mean/std (population) over the given samples, in [0, 1] units.
// `pixels` is sample-major C×H×W u8. std is floored at 1e-6.
Normalization compute_normalization(std::span<const std::uint8_t> pixels, std::size_t channels,
                                    std::size_t image_size, std::span<const std::size_t> samples);

enum class CropMode { face, center };
std::string_view to_string(CropMode mode);
CropMode crop_mode_from_string(std::string_view text);

// Packed, labeled, split, normalized image collection.
struct DatasetPack {
  std::size_t image_size = 224;
  std::size_t channels = 3;
  std::vector<std::string> class_names;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> pixels;  // sample-major, C×H×W per sample
  SplitAssignment splits;
  Normalization normalization;
  std::uint64_t seed = 0;
  CropMode crop_mode = CropMode::center;
  std::size_t replicas = 0;

  std::size_t sample_count() const { return labels.size(); }
  std::size_t sample_bytes() const { return channels * image_size * image_size; }
  std::span<const std::uint8_t> sample(std::size_t i) const {
    return std::span(pixels).subspan(i * sample_bytes(), sample_bytes());
  }
};

std::vector<std::uint8_t> encode_pack(const DatasetPack& pack);
DatasetPack decode_pack(std::span<const std::uint8_t> bytes);
void save_pack(const std::filesystem::path& path, const DatasetPack& pack);
DatasetPack load_pack(const std::filesystem::path& path);

// Normalized float batch B×C×S×S for the given sample indices.
Tensor make_batch(const DatasetPack& pack, std::span<const std::size_t> indices,
                  const Normalization& normalization);
std::vector<std::size_t> batch_labels(const DatasetPack& pack, std::span<const std::size_t> indices);

}  // namespace woodnet
