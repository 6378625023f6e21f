#include "woodnet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "woodnet/container.hpp"

namespace woodnet {

RawImage::RawImage(std::size_t w, std::size_t h, std::uint8_t fill)
    : width(w), height(h), pixels(w * h * 3, fill) {
  if (w == 0 || h == 0) throw InputError("image extents must be at least 1");
}

namespace {

class PpmHeaderReader {
 public:
  explicit PpmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 24)) throw FormatError(std::string("PPM ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("PPM: expected ") + what, start);
    return value;
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw FormatError("PPM: expected whitespace after maxval", pos_);
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

RawImage decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw FormatError("not a binary PPM (missing P6 magic)", 0);
  PpmHeaderReader reader(bytes);
  const std::size_t width = reader.number("width");
  const std::size_t height = reader.number("height");
  const std::size_t maxval_at = reader.pos();
  const std::size_t maxval = reader.number("maxval");
  if (maxval != 255)
    throw FormatError("PPM maxval " + std::to_string(maxval) + " unsupported (need 255)", maxval_at);
  reader.single_whitespace();
  if (width == 0 || height == 0) throw FormatError("PPM with zero extent", maxval_at);
  const std::size_t need = width * height * 3;
  const std::size_t have = bytes.size() - reader.pos();
  if (have < need)
    throw FormatError("PPM payload truncated: " + std::to_string(have) + " of " +
                          std::to_string(need) + " bytes",
                      bytes.size());
  RawImage img(width, height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(reader.pos()), need, img.pixels.begin());
  return img;
}

std::vector<std::uint8_t> encode_ppm(const RawImage& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

RawImage read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

void write_ppm(const std::filesystem::path& path, const RawImage& image) {
  write_file(path, encode_ppm(image));
}

std::vector<FaceBox> parse_face_boxes(const std::string& text) {
  std::vector<FaceBox> boxes;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      boxes.push_back(FaceBox{j.at("image").get<std::string>(), j.at("x").get<long>(),
                              j.at("y").get<long>(), j.at("w").get<long>(), j.at("h").get<long>()});
    } catch (const nlohmann::json::exception& e) {
      throw InputError("face boxes line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return boxes;
}

std::vector<FaceBox> read_face_boxes(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_face_boxes(std::string(bytes.begin(), bytes.end()));
}

RawImage crop(const RawImage& image, std::size_t x, std::size_t y, std::size_t w, std::size_t h) {
  if (x + w > image.width || y + h > image.height || w == 0 || h == 0)
    throw InputError("crop window outside image");
  RawImage out(w, h);
  for (std::size_t row = 0; row < h; ++row)
    std::copy_n(image.pixels.begin() + static_cast<std::ptrdiff_t>(((y + row) * image.width + x) * 3),
                w * 3, out.pixels.begin() + static_cast<std::ptrdiff_t>(row * w * 3));
  return out;
}

RawImage center_crop_square(const RawImage& image) {
  const std::size_t side = std::min(image.width, image.height);
  return crop(image, (image.width - side) / 2, (image.height - side) / 2, side, side);
}

RawImage face_crop_square(const RawImage& image, const FaceBox& box) {
  const long W = static_cast<long>(image.width), H = static_cast<long>(image.height);
  if (box.w < 1 || box.h < 1) throw InputError("face box for " + box.image + " has empty extent");
  if (box.x >= W || box.y >= H || box.x + box.w <= 0 || box.y + box.h <= 0)
    throw InputError("face box for " + box.image + " does not intersect the image");
  const long side = std::max(box.w, box.h);
  if (side > std::min(W, H)) return center_crop_square(image);
  // Floor division keeps the square centered on the box for both parities.
  const auto floor_half = [](long v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
  long left = box.x + floor_half(box.w - side);
  long top = box.y + floor_half(box.h - side);
  left = std::clamp(left, 0L, W - side);
  top = std::clamp(top, 0L, H - side);
  return crop(image, static_cast<std::size_t>(left), static_cast<std::size_t>(top),
              static_cast<std::size_t>(side), static_cast<std::size_t>(side));
}

RawImage resize_bilinear(const RawImage& image, std::size_t target) {
  if (image.width != image.height)
    throw ShapeError("resize_bilinear expects a square image, got " + std::to_string(image.width) +
                     "x" + std::to_string(image.height));
  if (target == 0) throw ConfigError("resize target must be positive");
  if (image.width == target) return image;
  const std::size_t S = image.width;
  const double ratio = static_cast<double>(S) / static_cast<double>(target);

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  std::vector<Tap> taps(target);
  for (std::size_t d = 0; d < target; ++d) {
    const double src = std::clamp((static_cast<double>(d) + 0.5) * ratio - 0.5, 0.0,
                                  static_cast<double>(S - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    taps[d] = {lo, std::min(lo + 1, S - 1), src - static_cast<double>(lo)};
  }

  RawImage out(target, target);
  for (std::size_t y = 0; y < target; ++y) {
    const Tap ty = taps[y];
    for (std::size_t x = 0; x < target; ++x) {
      const Tap tx = taps[x];
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = image.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + image.at(tx.hi, ty.lo, c) * tx.frac;
        const double bottom = image.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + image.at(tx.hi, ty.hi, c) * tx.frac;
        const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace woodnet
