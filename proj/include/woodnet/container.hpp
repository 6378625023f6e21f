#pragma once

// Shared on-disk framing for checkpoints and dataset packs:
//   bytes 0-7   magic (8 ASCII chars)
//   bytes 8-11  header length, u32 little-endian
//   header      canonical JSON (sorted keys, no whitespace, UTF-8)
//   payload     format-specific bytes

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace woodnet {

std::string canonical_json(const nlohmann::json& j);

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v);
void append_f32_le(std::vector<std::uint8_t>& out, float v);
float read_f32_le(const std::uint8_t* p);

std::vector<std::uint8_t> frame_container(std::string_view magic, const nlohmann::json& header);

struct ParsedContainer {
  nlohmann::json header;
  std::size_t payload_offset = 0;
};

// Validates magic and header framing; FormatError carries the failing offset.
ParsedContainer parse_container(std::span<const std::uint8_t> bytes, std::string_view magic);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and renames, so readers never see a torn file.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace woodnet
