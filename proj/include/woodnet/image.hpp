#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "woodnet/error.hpp"

namespace woodnet {

// 8-bit RGB image, row-major, channels interleaved (H×W×3).
struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  RawImage() = default;
  RawImage(std::size_t w, std::size_t h, std::uint8_t fill = 0);

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) {
    return pixels[(y * width + x) * 3 + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }
  bool operator==(const RawImage&) const = default;
};

// Binary PPM (P6) with maxval 255; comments in the header are skipped.
RawImage decode_ppm(std::span<const std::uint8_t> bytes);
// Canonical form: "P6\n<w> <h>\n255\n" followed by the raw pixels.
std::vector<std::uint8_t> encode_ppm(const RawImage& image);
RawImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RawImage& image);

// Face bounding box in pixels, top-left anchored, as produced by an external
// detector.
struct FaceBox {
  std::string image;
  long x = 0;
  long y = 0;
  long w = 0;
  long h = 0;
};

// One JSON object per line: {"image": <relative path>, "x", "y", "w", "h"}.
std::vector<FaceBox> parse_face_boxes(const std::string& text);
std::vector<FaceBox> read_face_boxes(const std::filesystem::path& path);

RawImage crop(const RawImage& image, std::size_t x, std::size_t y, std::size_t w, std::size_t h);

// Square of side min(W, H); odd trims lose the extra pixel on the right/bottom.
RawImage center_crop_square(const RawImage& image);

// Square of side max(box.w, box.h) centered on the box, shifted to stay in
// bounds. Falls back to center_crop_square when the square cannot fit.
RawImage face_crop_square(const RawImage& image, const FaceBox& box);

// Bilinear resize of a square image using pixel-center alignment,
// src = (dst + 0.5) * S / target - 0.5, edge-clamped, rounded half up.
RawImage resize_bilinear(const RawImage& image, std::size_t target = 224);

}  // namespace woodnet
