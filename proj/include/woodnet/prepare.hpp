#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "woodnet/datapipe.hpp"
#include "woodnet/image.hpp"

namespace woodnet {

// Several per-file problems found in one pipeline run.
class PipelineError : public InputError {
 public:
  explicit PipelineError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct PrepareOptions {
  std::filesystem::path input_dir;
  CropMode crop = CropMode::center;
  std::optional<std::filesystem::path> face_boxes;
  std::size_t size = 224;
  std::size_t replicas = 19;
  SplitFractions split;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: OpenMP default
};

struct PrepareReport {
  std::vector<std::string> class_names;
  std::vector<std::size_t> found_per_class;
  std::vector<std::size_t> kept_per_class;
  std::size_t samples = 0;
  std::size_t train = 0, val = 0, test = 0;
};

// Planar C×H×W copy of an interleaved RGB image.
std::vector<std::uint8_t> planar_pixels(const RawImage& image);

// Crop (face box when given, else center) and resize to `size`.
RawImage preprocess(const RawImage& image, const FaceBox* box, std::size_t size);

// decode -> crop -> resize -> balance -> augment -> split -> normalize.
// The result depends only on the input bytes, boxes and seed; the worker
// count only changes how fast it is produced.
DatasetPack prepare_dataset(const PrepareOptions& options, PrepareReport* report = nullptr);

}  // namespace woodnet
