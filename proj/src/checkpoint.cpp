#include "woodnet/checkpoint.hpp"

#include "woodnet/container.hpp"

namespace woodnet {

std::vector<std::uint8_t> encode_checkpoint(const Network<float>& network,
                                            const Normalization& normalization,
                                            const TrainingMeta& meta) {
  const NetworkSpec spec = network.spec();
  const std::size_t payload_bytes = network.parameter_count() * sizeof(float);
  nlohmann::json header = {
      {"network", spec.to_json()},
      {"scalar", "float32"},
      {"class_names", spec.class_names},
      {"normalization", {{"mean", normalization.mean}, {"std", normalization.std}}},
      {"training",
       {{"epoch", meta.epoch}, {"best_val_accuracy", meta.best_val_accuracy}, {"seed", meta.seed}}},
      {"payload_bytes", payload_bytes},
  };
  std::vector<std::uint8_t> out = frame_container(kCheckpointMagic, header);
  out.reserve(out.size() + payload_bytes);
  for (const auto* slot : network.parameters())
    for (float v : slot->value.values()) append_f32_le(out, v);
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  const ParsedContainer parsed = parse_container(bytes, kCheckpointMagic);
  const nlohmann::json& h = parsed.header;
  const std::size_t header_at = kCheckpointMagic.size() + 4;
  try {
    if (h.at("scalar").get<std::string>() != "float32")
      throw FormatError("unsupported scalar type " + h.at("scalar").dump(), header_at);
    NetworkSpec spec = NetworkSpec::from_json(h.at("network"));
    if (h.at("class_names").get<std::vector<std::string>>() != spec.class_names)
      throw FormatError("header class names disagree with the network", header_at);

    Normalization norm;
    norm.mean = h.at("normalization").at("mean").get<std::vector<double>>();
    norm.std = h.at("normalization").at("std").get<std::vector<double>>();
    TrainingMeta meta;
    meta.epoch = h.at("training").at("epoch").get<std::size_t>();
    meta.best_val_accuracy = h.at("training").at("best_val_accuracy").get<double>();
    meta.seed = h.at("training").at("seed").get<std::uint64_t>();

    Network<float> net(std::move(spec), meta.seed);
    const std::size_t expected = net.parameter_count() * sizeof(float);
    const std::size_t declared = h.at("payload_bytes").get<std::size_t>();
    const std::size_t actual = bytes.size() - parsed.payload_offset;
    if (declared != expected)
      throw FormatError("header declares " + std::to_string(declared) +
                            " payload bytes, network needs " + std::to_string(expected),
                        parsed.payload_offset);
    if (actual != expected)
      throw FormatError("payload holds " + std::to_string(actual) + " bytes, expected " +
                            std::to_string(expected),
                        parsed.payload_offset + std::min(actual, expected));

    const std::uint8_t* p = bytes.data() + parsed.payload_offset;
    for (auto* slot : net.parameters())
      for (float& v : slot->value.values()) {
        v = read_f32_le(p);
        p += sizeof(float);
      }
    return Checkpoint{std::move(net), std::move(norm), meta};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what(), header_at);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint network: ") + e.what(), header_at);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint network: ") + e.what(), header_at);
  }
}

void save_checkpoint(const std::filesystem::path& path, const Network<float>& network,
                     const Normalization& normalization, const TrainingMeta& meta) {
  write_file(path, encode_checkpoint(network, normalization, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace woodnet
