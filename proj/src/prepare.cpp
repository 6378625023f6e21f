#include "woodnet/prepare.hpp"

#include <omp.h>

#include <algorithm>
#include <map>

#include "woodnet/augment.hpp"
#include "woodnet/rng.hpp"

namespace woodnet {

namespace fs = std::filesystem;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string text = std::to_string(issues.size()) + " input problem(s):";
  for (const auto& i : issues) text += "\n  " + i;
  return text;
}

struct Original {
  std::string rel_path;  // "<class>/<file>.ppm"
  fs::path path;
  std::uint8_t label = 0;
};

}  // namespace

PipelineError::PipelineError(std::vector<std::string> issues)
    : InputError(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::uint8_t> planar_pixels(const RawImage& image) {
  const std::size_t plane = image.width * image.height;
  std::vector<std::uint8_t> out(plane * 3);
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) out[c * plane + i] = image.pixels[i * 3 + c];
  return out;
}

RawImage preprocess(const RawImage& image, const FaceBox* box, std::size_t size) {
  const RawImage square = box ? face_crop_square(image, *box) : center_crop_square(image);
  return resize_bilinear(square, size);
}

DatasetPack prepare_dataset(const PrepareOptions& options, PrepareReport* report) {
  options.split.validate();
  if (options.size == 0 || options.size > 4096) throw ConfigError("image size must be in [1, 4096]");
  if (!fs::is_directory(options.input_dir))
    throw InputError("input directory " + options.input_dir.string() + " does not exist");
  if (options.crop == CropMode::face && !options.face_boxes)
    throw ConfigError("--crop face requires a face-box file");

  std::vector<std::string> class_names;
  for (const auto& entry : fs::directory_iterator(options.input_dir))
    if (entry.is_directory()) class_names.push_back(entry.path().filename().string());
  std::sort(class_names.begin(), class_names.end());
  if (class_names.size() < 2)
    throw InputError("expected at least two class directories under " + options.input_dir.string());
  if (class_names.size() > 255) throw InputError("at most 255 classes fit the u8 label array");

  std::vector<std::vector<Original>> per_class(class_names.size());
  std::vector<std::size_t> found;
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    for (const auto& entry : fs::directory_iterator(options.input_dir / class_names[c]))
      if (entry.is_regular_file() && entry.path().extension() == ".ppm")
        per_class[c].push_back(Original{class_names[c] + "/" + entry.path().filename().string(),
                                        entry.path(), static_cast<std::uint8_t>(c)});
    std::sort(per_class[c].begin(), per_class[c].end(),
              [](const Original& a, const Original& b) { return a.rel_path < b.rel_path; });
    found.push_back(per_class[c].size());
  }
  for (std::size_t c = 0; c < class_names.size(); ++c)
    if (found[c] == 0) throw InputError("class directory '" + class_names[c] + "' holds no .ppm images");

  std::map<std::string, FaceBox> boxes;
  if (options.crop == CropMode::face)
    for (auto& b : read_face_boxes(*options.face_boxes)) boxes[b.image] = b;

  const auto selection = balance_classes(found, options.seed);
  std::vector<Original> originals;
  for (std::size_t c = 0; c < selection.size(); ++c)
    for (std::size_t i : selection[c]) originals.push_back(per_class[c][i]);

  const std::size_t per_original = options.replicas + 1;
  const std::size_t sample_bytes = 3 * options.size * options.size;
  DatasetPack pack;
  pack.image_size = options.size;
  pack.class_names = class_names;
  pack.seed = options.seed;
  pack.crop_mode = options.crop;
  pack.replicas = options.replicas;
  pack.labels.resize(originals.size() * per_original);
  pack.pixels.resize(pack.labels.size() * sample_bytes);

  std::vector<std::string> issues(originals.size());
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
  const auto count = static_cast<std::ptrdiff_t>(originals.size());

  // Every slot of the output is written by exactly one iteration, and each
  // iteration's randomness is keyed on the image path, not the thread.
#pragma omp parallel for num_threads(workers) schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const Original& o = originals[static_cast<std::size_t>(k)];
    try {
      const FaceBox* box = nullptr;
      if (options.crop == CropMode::face) {
        auto it = boxes.find(o.rel_path);
        if (it == boxes.end()) throw InputError("no face box");
        box = &it->second;
      }
      const RawImage base = preprocess(read_ppm(o.path), box, options.size);
      const std::uint64_t image_id = fnv1a64(o.rel_path);
      for (std::size_t r = 0; r < per_original; ++r) {
        const RawImage img = r == 0 ? base : augment(base, sample_plan(options.seed, image_id, r));
        const std::size_t slot = static_cast<std::size_t>(k) * per_original + r;
        const auto planar = planar_pixels(img);
        std::copy(planar.begin(), planar.end(), pack.pixels.begin() + static_cast<std::ptrdiff_t>(slot * sample_bytes));
        pack.labels[slot] = o.label;
      }
    } catch (const std::exception& e) {
      issues[static_cast<std::size_t>(k)] = o.rel_path + ": " + e.what();
    }
  }
  std::erase_if(issues, [](const std::string& s) { return s.empty(); });
  if (!issues.empty()) throw PipelineError(std::move(issues));

  const std::vector<std::size_t> groups(originals.size(), per_original);
  pack.splits = split_dataset(groups, options.split, options.seed);
  if (pack.splits.train.empty()) throw InputError("training split is empty; add more images");
  pack.normalization = compute_normalization(pack.pixels, 3, options.size, pack.splits.train);

  if (report) {
    report->class_names = class_names;
    report->found_per_class = found;
    report->kept_per_class.clear();
    for (const auto& s : selection) report->kept_per_class.push_back(s.size());
    report->samples = pack.sample_count();
    report->train = pack.splits.train.size();
    report->val = pack.splits.val.size();
    report->test = pack.splits.test.size();
  }
  return pack;
}

}  // namespace woodnet
