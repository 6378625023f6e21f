#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "woodnet/layers.hpp"
#include "woodnet/rng.hpp"

namespace woodnet {

struct GradCheckResult {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t configurations = 0;
  std::size_t checked_values = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckResult> results;
  bool passed() const;
};

inline constexpr double kGradCheckTolerance = 1e-4;

// |a - n| / max(|a|, |n|, 1e-6): relative where gradients are sizeable, an
// absolute 1e-10 floor where both are essentially zero.
double gradient_relative_error(double analytic, double numeric);

// A random layer instance plus the input it should be probed at.
struct GradProbe {
  std::unique_ptr<Layer<double>> layer;
  TensorD input;
};
using ProbeFactory = std::function<GradProbe(Rng&)>;

// Central differences (h = 1e-3·max(1, |x|)) on the scalar loss sum(r ⊙ f(x))
// with a random projection r, for every input element and parameter.
GradCheckResult check_layer_gradients(const std::string& name, const ProbeFactory& factory,
                                      std::uint64_t seed, std::size_t configurations = 5,
                                      double tolerance = kGradCheckTolerance);

GradCheckResult check_cross_entropy_gradients(std::uint64_t seed, std::size_t configurations = 5,
                                              double tolerance = kGradCheckTolerance);

// Probe factories for each built-in layer kind.
ProbeFactory probe_factory(LayerKind kind);

// `which` is "all", a layer kind name, or "cross_entropy". With "all" every
// layer kind appears exactly once, followed by cross_entropy.
GradCheckReport run_gradcheck(const std::string& which, std::uint64_t seed);

}  // namespace woodnet
