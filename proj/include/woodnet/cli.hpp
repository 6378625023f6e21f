#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "woodnet/checkpoint.hpp"
#include "woodnet/gradcheck.hpp"
#include "woodnet/image.hpp"

namespace woodnet {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitVerification = 3 };

struct InferenceResult {
  std::string path;
  std::vector<double> probabilities;
  std::size_t predicted = 0;
  std::string class_name;
  double certainty = 0.0;

  nlohmann::json to_json(const std::vector<std::string>& class_names) const;
};

// Crop (box or center), resize to the network's input, normalize with the
// checkpoint's statistics and run one eval-mode forward pass.
InferenceResult infer_image(Checkpoint& checkpoint, const RawImage& image, const FaceBox* box);

// Table with one line per checked target and a final verdict line.
std::string format_gradcheck_report(const GradCheckReport& report);

// Entry point behind the `woodnet` executable. Returns the process exit code.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace woodnet
