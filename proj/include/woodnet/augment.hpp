#pragma once

#include <array>
#include <cstdint>

#include "woodnet/image.hpp"

namespace woodnet {

enum class Transform { rotation, scale, noise, brightness, translation };

enum class NoiseMode { additive, blur };

struct AugmentationRanges {
  static constexpr double max_rotation_deg = 5.0;
  static constexpr double min_scale = 0.95;
  static constexpr double max_scale = 1.10;
  static constexpr double max_noise_sigma = 1.0;  // 8-bit units, sigma in (0, max]
  static constexpr int max_brightness = 10;       // 8-bit units
  static constexpr double max_translation = 0.10; // fraction of each axis
};

// Parameters for one augmented replica. Fully determined by
// (seed, image id, replica index) when produced by sample_plan.
struct AugmentationPlan {
  std::array<Transform, 5> order{Transform::rotation, Transform::scale, Transform::noise,
                                 Transform::brightness, Transform::translation};
  double rotation_deg = 0.0;
  double scale = 1.0;
  double noise_sigma = 0.0;
  NoiseMode noise_mode = NoiseMode::additive;
  int brightness = 0;
  double translate_x = 0.0;
  double translate_y = 0.0;
  std::uint64_t noise_key = 0;

  // True when every sampled parameter lies inside AugmentationRanges and the
  // order is a permutation of all five transforms.
  bool within_ranges() const;
};

AugmentationPlan sample_plan(std::uint64_t seed, std::uint64_t image_id, std::uint64_t replica);

// Applies the plan's transforms in order. Consecutive geometric transforms are
// folded into one affine resample (bilinear, black outside the source);
// pointwise steps clamp to [0, 255]. Output is rounded half up.
RawImage augment(const RawImage& image, const AugmentationPlan& plan);

}  // namespace woodnet
