#include "woodnet/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "woodnet/rng.hpp"

namespace woodnet {

bool AugmentationPlan::within_ranges() const {
  using R = AugmentationRanges;
  std::array<Transform, 5> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (static_cast<std::size_t>(sorted[i]) != i) return false;
  return std::abs(rotation_deg) <= R::max_rotation_deg && scale >= R::min_scale &&
         scale <= R::max_scale && noise_sigma > 0.0 && noise_sigma <= R::max_noise_sigma &&
         std::abs(brightness) <= R::max_brightness && std::abs(translate_x) <= R::max_translation &&
         std::abs(translate_y) <= R::max_translation;
}

AugmentationPlan sample_plan(std::uint64_t seed, std::uint64_t image_id, std::uint64_t replica) {
  using R = AugmentationRanges;
  Rng rng = make_rng(seed, StreamPurpose::augment, {image_id, replica});
  AugmentationPlan plan;
  plan.rotation_deg = uniform(rng, -R::max_rotation_deg, R::max_rotation_deg);
  plan.scale = uniform(rng, R::min_scale, R::max_scale);
  // 1 - U[0,1) lands in (0, 1].
  plan.noise_sigma = R::max_noise_sigma * (1.0 - unit_uniform(rng));
  plan.brightness = static_cast<int>(rng() % (2 * R::max_brightness + 1)) - R::max_brightness;
  plan.translate_x = uniform(rng, -R::max_translation, R::max_translation);
  plan.translate_y = uniform(rng, -R::max_translation, R::max_translation);
  // Fisher-Yates with our own index draws so the permutation does not depend
  // on the standard library's shuffle.
  for (std::size_t i = plan.order.size() - 1; i > 0; --i)
    std::swap(plan.order[i], plan.order[rng() % (i + 1)]);
  plan.noise_key = rng();
  return plan;
}

namespace {

// Row-major 2-D affine map: [x', y'] = [a b; d e][x, y] + [c, f].
struct Affine {
  double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

  static Affine about_center(double m00, double m01, double m10, double m11, double cx, double cy) {
    // p' = M (p - center) + center
    return {m00, m01, cx - m00 * cx - m01 * cy, m10, m11, cy - m10 * cx - m11 * cy};
  }
  // this ∘ rhs: apply rhs first.
  Affine after(const Affine& r) const {
    return {a * r.a + b * r.d, a * r.b + b * r.e, a * r.c + b * r.f + c,
            d * r.a + e * r.d, d * r.b + e * r.e, d * r.c + e * r.f + f};
  }
  Affine inverse() const {
    const double det = a * e - b * d;
    const double ia = e / det, ib = -b / det, id = -d / det, ie = a / det;
    return {ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)};
  }
  bool is_identity() const { return a == 1 && b == 0 && c == 0 && d == 0 && e == 1 && f == 0; }
};

struct FloatImage {
  std::size_t width, height;
  std::vector<double> v;  // H×W×3
};

FloatImage resample(const FloatImage& src, const Affine& forward) {
  const Affine inv = forward.inverse();
  FloatImage out{src.width, src.height, std::vector<double>(src.v.size(), 0.0)};
  const auto W = static_cast<long>(src.width), H = static_cast<long>(src.height);
  for (std::size_t y = 0; y < src.height; ++y)
    for (std::size_t x = 0; x < src.width; ++x) {
      const double sx = inv.a * x + inv.b * y + inv.c;
      const double sy = inv.d * x + inv.e * y + inv.f;
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const double fx = sx - fx0, fy = sy - fy0;
      if (fx0 < -1 || fy0 < -1 || fx0 >= W || fy0 >= H) continue;
      const long x0 = static_cast<long>(fx0), y0 = static_cast<long>(fy0);
      double acc[3] = {0, 0, 0};
      const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const long xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const long ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int t = 0; t < 4; ++t) {
        if (wts[t] == 0.0 || xs[t] < 0 || ys[t] < 0 || xs[t] >= W || ys[t] >= H) continue;
        const double* p = &src.v[(static_cast<std::size_t>(ys[t]) * src.width + static_cast<std::size_t>(xs[t])) * 3];
        for (int c = 0; c < 3; ++c) acc[c] += wts[t] * p[c];
      }
      double* q = &out.v[(y * src.width + x) * 3];
      for (int c = 0; c < 3; ++c) q[c] = acc[c];
    }
  return out;
}

void clamp_pixels(FloatImage& img) {
  for (double& v : img.v) v = std::clamp(v, 0.0, 255.0);
}

}  // namespace

RawImage augment(const RawImage& image, const AugmentationPlan& plan) {
  FloatImage img{image.width, image.height, std::vector<double>(image.pixels.begin(), image.pixels.end())};
  const double cx = (static_cast<double>(image.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(image.height) - 1.0) / 2.0;

  Affine pending;
  const auto flush = [&] {
    if (!pending.is_identity()) img = resample(img, pending);
    pending = Affine{};
  };

  for (Transform t : plan.order) {
    switch (t) {
      case Transform::rotation: {
        const double r = plan.rotation_deg * std::numbers::pi / 180.0;
        const double cs = std::cos(r), sn = std::sin(r);
        pending = Affine::about_center(cs, -sn, sn, cs, cx, cy).after(pending);
        break;
      }
      case Transform::scale:
        pending = Affine::about_center(plan.scale, 0, 0, plan.scale, cx, cy).after(pending);
        break;
      case Transform::translation:
        pending = Affine{1, 0, plan.translate_x * static_cast<double>(image.width), 0, 1,
                         plan.translate_y * static_cast<double>(image.height)}
                      .after(pending);
        break;
      case Transform::noise: {
        if (plan.noise_mode == NoiseMode::blur)
          throw ConfigError("gaussian blur augmentation is not implemented");
        if (plan.noise_sigma <= 0.0) break;
        flush();
        Rng rng(plan.noise_key);
        std::normal_distribution<double> noise(0.0, plan.noise_sigma);
        for (double& v : img.v) v += noise(rng);
        clamp_pixels(img);
        break;
      }
      case Transform::brightness:
        if (plan.brightness == 0) break;
        flush();
        for (double& v : img.v) v += plan.brightness;
        clamp_pixels(img);
        break;
    }
  }
  flush();

  RawImage out(image.width, image.height);
  for (std::size_t i = 0; i < img.v.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::floor(img.v[i] + 0.5), 0.0, 255.0));
  return out;
}

}  // namespace woodnet
