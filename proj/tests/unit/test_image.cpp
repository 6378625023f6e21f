#include <gtest/gtest.h>

#include <string>

#include "synthetic.hpp"
#include "woodnet/error.hpp"
#include "woodnet/image.hpp"
#include "woodnet/rng.hpp"

using namespace woodnet;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::initializer_list<std::uint8_t> payload = {}) {
  std::vector<std::uint8_t> b(header.begin(), header.end());
  b.insert(b.end(), payload);
  return b;
}

// Each pixel encodes its own coordinates: R = x, G = y.
RawImage coordinate_image(std::size_t w, std::size_t h) {
  RawImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(x);
      img.at(x, y, 1) = static_cast<std::uint8_t>(y);
      img.at(x, y, 2) = 7;
    }
  return img;
}

void expect_window(const RawImage& out, std::size_t x0, std::size_t y0, std::size_t side) {
  ASSERT_EQ(out.width, side);
  ASSERT_EQ(out.height, side);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x) {
      ASSERT_EQ(out.at(x, y, 0), x0 + x);
      ASSERT_EQ(out.at(x, y, 1), y0 + y);
    }
}

RawImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  RawImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

}  // namespace

TEST(Ppm, SingleRedPixel) {
  const auto img = decode_ppm(bytes_of("P6\n1 1\n255\n", {255, 0, 0}));
  EXPECT_EQ(img.width, 1u);
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{255, 0, 0}));
}

TEST(Ppm, CanonicalRoundTrip) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto img = random_image(3 + seed, 2 + 2 * seed, seed);
    const auto encoded = encode_ppm(img);
    EXPECT_EQ(decode_ppm(encoded), img);
    EXPECT_EQ(encode_ppm(decode_ppm(encoded)), encoded);
  }
}

TEST(Ppm, HeaderCommentsSkipped) {
  const auto img = decode_ppm(bytes_of("P6\n# made by hand\n1 1\n255\n", {1, 2, 3}));
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{1, 2, 3}));
}

TEST(Ppm, MalformedInputsRejected) {
  EXPECT_THROW(decode_ppm(bytes_of("P6\n1 1\n65535\n", {0, 0, 0, 0, 0, 0})), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P3\n1 1\n255\n", {1, 2, 3})), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n2 1\n255\n", {1, 2, 3})), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n1")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("")), FormatError);
}

TEST(Ppm, FileRoundTrip) {
  woodnet::testing::TempDir dir("ppm");
  const auto img = random_image(5, 4, 11);
  write_ppm(dir / "a.ppm", img);
  EXPECT_EQ(read_ppm(dir / "a.ppm"), img);
  EXPECT_THROW(read_ppm(dir / "missing.ppm"), Error);
}

TEST(CenterCrop, LandscapeHdFrame) {
  const auto out = center_crop_square(RawImage(1920, 1080, 9));
  EXPECT_EQ(out.width, 1080u);
  EXPECT_EQ(out.height, 1080u);
}

TEST(CenterCrop, SixByFourKeepsColumnsOneToFour) {
  expect_window(center_crop_square(coordinate_image(6, 4)), 1, 0, 4);
}

TEST(CenterCrop, OddTrimLosesRightAndBottomPixel) {
  expect_window(center_crop_square(coordinate_image(7, 4)), 1, 0, 4);
  expect_window(center_crop_square(coordinate_image(4, 7)), 0, 1, 4);
}

TEST(CenterCrop, SquareIsIdentity) {
  const auto img = random_image(9, 9, 3);
  EXPECT_EQ(center_crop_square(img), img);
}

TEST(FaceCrop, BoxCenteredSquare) {
  expect_window(face_crop_square(coordinate_image(200, 200), FaceBox{"a", 10, 20, 50, 60}), 5, 20, 60);
}

TEST(FaceCrop, CenteredSquareBoxIsIdentityCrop) {
  const auto img = random_image(12, 8, 4);
  EXPECT_EQ(face_crop_square(img, FaceBox{"a", 2, 0, 8, 8}), center_crop_square(img));
}

TEST(FaceCrop, CornerBoxesShiftInside) {
  const auto img = coordinate_image(100, 100);
  expect_window(face_crop_square(img, FaceBox{"a", 0, 0, 10, 20}), 0, 0, 20);
  expect_window(face_crop_square(img, FaceBox{"a", 96, 96, 4, 8}), 92, 92, 8);
  expect_window(face_crop_square(img, FaceBox{"a", -5, 90, 10, 30}), 0, 70, 30);
}

TEST(FaceCrop, OversizedBoxFallsBackToCenterCrop) {
  const auto img = random_image(30, 20, 5);
  EXPECT_EQ(face_crop_square(img, FaceBox{"a", 0, 0, 30, 20}), center_crop_square(img));
}

TEST(FaceCrop, DisjointBoxRejected) {
  const auto img = random_image(30, 20, 5);
  EXPECT_THROW(face_crop_square(img, FaceBox{"a", 40, 0, 5, 5}), InputError);
  EXPECT_THROW(face_crop_square(img, FaceBox{"a", 0, -10, 5, 10}), InputError);
  EXPECT_THROW(face_crop_square(img, FaceBox{"a", 1, 1, 0, 5}), InputError);
}

TEST(FaceBoxes, ParsesJsonLines) {
  const auto boxes = parse_face_boxes(
      "{\"image\": \"Lars/a.ppm\", \"x\": 1, \"y\": 2, \"w\": 3, \"h\": 4}\n\n"
      "{\"image\": \"b.ppm\", \"x\": -1, \"y\": 0, \"w\": 5, \"h\": 6}\n");
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0].image, "Lars/a.ppm");
  EXPECT_EQ(boxes[0].h, 4);
  EXPECT_EQ(boxes[1].x, -1);
  EXPECT_THROW(parse_face_boxes("{\"image\": \"a\"}\n"), Error);
  EXPECT_THROW(parse_face_boxes("not json\n"), Error);
}

TEST(Resize, SameSizeIsBitIdentical) {
  const auto img = random_image(224, 224, 6);
  EXPECT_EQ(resize_bilinear(img), img);
}

TEST(Resize, ConstantStaysConstant) {
  for (std::size_t side : {3u, 50u, 333u}) {
    const auto out = resize_bilinear(RawImage(side, side, 77), 224);
    ASSERT_EQ(out.width, 224u);
    for (auto p : out.pixels) ASSERT_EQ(p, 77);
  }
}

TEST(Resize, CheckerboardToOnePixelIsRoundedMean) {
  RawImage img(2, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    img.at(0, 0, c) = 0;
    img.at(1, 0, c) = 255;
    img.at(0, 1, c) = 255;
    img.at(1, 1, c) = 0;
  }
  EXPECT_EQ(resize_bilinear(img, 1).pixels, (std::vector<std::uint8_t>{128, 128, 128}));
}

TEST(Resize, NonSquareRejected) {
  EXPECT_THROW(resize_bilinear(RawImage(4, 3)), ShapeError);
}
