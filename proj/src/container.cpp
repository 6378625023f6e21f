#include "woodnet/container.hpp"

#include <bit>
#include <fstream>

#include "woodnet/error.hpp"

namespace woodnet {

std::string canonical_json(const nlohmann::json& j) { return j.dump(); }

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f32_le(std::vector<std::uint8_t>& out, float v) {
  append_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

namespace {

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

float read_f32_le(const std::uint8_t* p) { return std::bit_cast<float>(read_u32_le(p)); }

std::vector<std::uint8_t> frame_container(std::string_view magic, const nlohmann::json& header) {
  const std::string text = canonical_json(header);
  std::vector<std::uint8_t> out(magic.begin(), magic.end());
  append_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

ParsedContainer parse_container(std::span<const std::uint8_t> bytes, std::string_view magic) {
  if (bytes.size() < magic.size())
    throw FormatError("file shorter than its " + std::string(magic) + " magic", bytes.size());
  for (std::size_t i = 0; i < magic.size(); ++i)
    if (bytes[i] != static_cast<std::uint8_t>(magic[i]))
      throw FormatError("bad magic, expected \"" + std::string(magic) + "\"", i);
  const std::size_t len_at = magic.size();
  if (bytes.size() < len_at + 4) throw FormatError("truncated header length", bytes.size());
  const std::size_t header_len = read_u32_le(bytes.data() + len_at);
  const std::size_t header_at = len_at + 4;
  if (bytes.size() - header_at < header_len)
    throw FormatError("header declares " + std::to_string(header_len) + " bytes but only " +
                          std::to_string(bytes.size() - header_at) + " remain",
                      bytes.size());
  ParsedContainer parsed;
  try {
    parsed.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(header_at),
                                          bytes.begin() + static_cast<std::ptrdiff_t>(header_at + header_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed header JSON: ") + e.what(), header_at + e.byte);
  }
  if (!parsed.header.is_object()) throw FormatError("header is not a JSON object", header_at);
  parsed.payload_offset = header_at + header_len;
  return parsed;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace woodnet
