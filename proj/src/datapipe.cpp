#include "woodnet/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "woodnet/container.hpp"
#include "woodnet/rng.hpp"

namespace woodnet {

std::vector<std::vector<std::size_t>> balance_classes(std::span<const std::size_t> counts,
                                                      std::uint64_t seed) {
  if (counts.empty()) throw InputError("balance_classes: no classes");
  const std::size_t n = *std::min_element(counts.begin(), counts.end());
  if (n == 0) {
    const auto empty = std::find(counts.begin(), counts.end(), 0u) - counts.begin();
    throw InputError("balance_classes: class " + std::to_string(empty) + " is empty");
  }
  std::vector<std::vector<std::size_t>> selected(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::vector<std::size_t> idx(counts[c]);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed, StreamPurpose::balance, {c});
    // Partial Fisher-Yates: the first n slots become a uniform sample.
    for (std::size_t i = 0; i < n && i + 1 < idx.size(); ++i)
      std::swap(idx[i], idx[i + rng() % (idx.size() - i)]);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    selected[c] = std::move(idx);
  }
  return selected;
}

SplitFractions SplitFractions::parse(std::string_view text) {
  std::vector<double> parts;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("split fraction '" + item + "' is not a number");
    }
  }
  if (parts.size() != 3) throw ConfigError("split needs three fractions train,val,test");
  SplitFractions f{parts[0], parts[1], parts[2]};
  f.validate();
  return f;
}

void SplitFractions::validate() const {
  if (train < 0 || val < 0 || test < 0) throw ConfigError("split fractions must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw ConfigError("split fractions sum to " + std::to_string(train + val + test) + ", not 1");
}

const std::vector<std::size_t>& SplitAssignment::by_name(std::string_view name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

SplitAssignment split_dataset(std::span<const std::size_t> group_sizes,
                              const SplitFractions& fractions, std::uint64_t seed) {
  fractions.validate();
  const std::size_t groups = group_sizes.size();
  std::vector<std::size_t> first(groups);
  std::exclusive_scan(group_sizes.begin(), group_sizes.end(), first.begin(), std::size_t{0});

  std::vector<std::size_t> order(groups);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, StreamPurpose::split);
  for (std::size_t i = groups; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  const auto n_train = std::min(
      groups, static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(groups))));
  const std::size_t rest = groups - n_train;
  const double held_out = fractions.val + fractions.test;
  const std::size_t n_val =
      held_out > 0 ? static_cast<std::size_t>(std::floor(static_cast<double>(rest) * fractions.val / held_out))
                   : 0;

  SplitAssignment s;
  for (std::size_t k = 0; k < groups; ++k) {
    const std::size_t g = order[k];
    auto& target = k < n_train ? s.train : (k < n_train + n_val ? s.val : s.test);
    for (std::size_t i = 0; i < group_sizes[g]; ++i) target.push_back(first[g] + i);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Normalization compute_normalization(std::span<const std::uint8_t> pixels, std::size_t channels,
                                    std::size_t image_size, std::span<const std::size_t> samples) {
  if (samples.empty()) throw InputError("compute_normalization: empty split");
  const std::size_t plane = image_size * image_size;
  Normalization n;
  n.mean.assign(channels, 0.0);
  n.std.assign(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    // Integer sums are exact; convert once at the end.
    std::uint64_t sum = 0, sum_sq = 0;
    for (std::size_t s : samples) {
      const std::uint8_t* p = pixels.data() + (s * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum += p[i];
        sum_sq += static_cast<std::uint64_t>(p[i]) * p[i];
      }
    }
    const double count = static_cast<double>(samples.size() * plane);
    const double mean = static_cast<double>(sum) / count;
    const double var = std::max(0.0, static_cast<double>(sum_sq) / count - mean * mean);
    n.mean[c] = mean / 255.0;
    n.std[c] = std::max(std::sqrt(var) / 255.0, 1e-6);
  }
  return n;
}

std::string_view to_string(CropMode mode) { return mode == CropMode::face ? "face" : "center"; }

CropMode crop_mode_from_string(std::string_view text) {
  if (text == "face") return CropMode::face;
  if (text == "center") return CropMode::center;
  throw ConfigError("crop mode must be 'face' or 'center', got '" + std::string(text) + "'");
}

std::vector<std::uint8_t> encode_pack(const DatasetPack& pack) {
  if (pack.pixels.size() != pack.sample_count() * pack.sample_bytes())
    throw ShapeError("dataset pixels do not match sample count");
  nlohmann::json header = {
      {"sample_count", pack.sample_count()},
      {"image_size", pack.image_size},
      {"channels", pack.channels},
      {"class_names", pack.class_names},
      {"splits", {{"train", pack.splits.train}, {"val", pack.splits.val}, {"test", pack.splits.test}}},
      {"normalization", {{"mean", pack.normalization.mean}, {"std", pack.normalization.std}}},
      {"seed", pack.seed},
      {"crop_mode", std::string(to_string(pack.crop_mode))},
      {"replicas", pack.replicas},
  };
  std::vector<std::uint8_t> out = frame_container(kDatasetMagic, header);
  out.insert(out.end(), pack.labels.begin(), pack.labels.end());
  out.insert(out.end(), pack.pixels.begin(), pack.pixels.end());
  return out;
}

DatasetPack decode_pack(std::span<const std::uint8_t> bytes) {
  const ParsedContainer parsed = parse_container(bytes, kDatasetMagic);
  const nlohmann::json& h = parsed.header;
  const std::size_t header_at = kDatasetMagic.size() + 4;
  DatasetPack pack;
  std::size_t count = 0;
  try {
    count = h.at("sample_count").get<std::size_t>();
    pack.image_size = h.at("image_size").get<std::size_t>();
    pack.channels = h.at("channels").get<std::size_t>();
    pack.class_names = h.at("class_names").get<std::vector<std::string>>();
    pack.splits.train = h.at("splits").at("train").get<std::vector<std::size_t>>();
    pack.splits.val = h.at("splits").at("val").get<std::vector<std::size_t>>();
    pack.splits.test = h.at("splits").at("test").get<std::vector<std::size_t>>();
    pack.normalization.mean = h.at("normalization").at("mean").get<std::vector<double>>();
    pack.normalization.std = h.at("normalization").at("std").get<std::vector<double>>();
    pack.seed = h.at("seed").get<std::uint64_t>();
    pack.crop_mode = crop_mode_from_string(h.at("crop_mode").get<std::string>());
    pack.replicas = h.at("replicas").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset header: ") + e.what(), header_at);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("dataset header: ") + e.what(), header_at);
  }
  const std::size_t expected = count * (1 + pack.sample_bytes());
  const std::size_t actual = bytes.size() - parsed.payload_offset;
  if (actual != expected)
    throw FormatError("dataset payload holds " + std::to_string(actual) + " bytes, header implies " +
                          std::to_string(expected),
                      parsed.payload_offset + std::min(actual, expected));

  std::vector<bool> seen(count, false);
  for (const auto* split : {&pack.splits.train, &pack.splits.val, &pack.splits.test})
    for (std::size_t i : *split) {
      if (i >= count || seen[i])
        throw FormatError("split index " + std::to_string(i) + " out of range or repeated", header_at);
      seen[i] = true;
    }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw FormatError("splits do not cover every sample", header_at);

  const auto* p = bytes.data() + parsed.payload_offset;
  pack.labels.assign(p, p + count);
  for (std::size_t i = 0; i < count; ++i)
    if (pack.labels[i] >= pack.class_names.size())
      throw FormatError("label " + std::to_string(pack.labels[i]) + " out of range",
                        parsed.payload_offset + i);
  pack.pixels.assign(p + count, p + expected);
  return pack;
}

void save_pack(const std::filesystem::path& path, const DatasetPack& pack) {
  write_file(path, encode_pack(pack));
}

DatasetPack load_pack(const std::filesystem::path& path) { return decode_pack(read_file(path)); }

Tensor make_batch(const DatasetPack& pack, std::span<const std::size_t> indices,
                  const Normalization& normalization) {
  const std::size_t C = pack.channels, S = pack.image_size, plane = S * S;
  if (normalization.mean.size() != C || normalization.std.size() != C)
    throw ConfigError("normalization has " + std::to_string(normalization.mean.size()) +
                      " channels, dataset has " + std::to_string(C));
  Tensor batch({indices.size(), C, S, S});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto src = pack.sample(indices[b]);
    float* dst = batch.data() + b * C * plane;
    for (std::size_t c = 0; c < C; ++c) {
      const double mean = normalization.mean[c], inv_std = 1.0 / normalization.std[c];
      for (std::size_t i = 0; i < plane; ++i)
        dst[c * plane + i] = static_cast<float>((src[c * plane + i] / 255.0 - mean) * inv_std);
    }
  }
  return batch;
}

std::vector<std::size_t> batch_labels(const DatasetPack& pack, std::span<const std::size_t> indices) {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(pack.labels.at(i));
  return out;
}

}  // namespace woodnet
