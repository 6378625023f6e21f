#include "woodnet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <map>

#include "CLI11.hpp"
#include "woodnet/container.hpp"
#include "woodnet/datapipe.hpp"
#include "woodnet/ops.hpp"
#include "woodnet/optim.hpp"
#include "woodnet/prepare.hpp"
#include "woodnet/train.hpp"

namespace woodnet {

namespace fs = std::filesystem;

nlohmann::json InferenceResult::to_json(const std::vector<std::string>& class_names) const {
  nlohmann::json probs = nlohmann::json::object();
  for (std::size_t i = 0; i < probabilities.size(); ++i) probs[class_names[i]] = probabilities[i];
  return {{"path", path}, {"class", class_name}, {"certainty", certainty}, {"probabilities", probs}};
}

InferenceResult infer_image(Checkpoint& checkpoint, const RawImage& image, const FaceBox* box) {
  Network<float>& net = checkpoint.network;
  const Shape& in = net.spec().input_shape;
  if (in.size() != 3 || in[1] != in[2])
    throw ConfigError("checkpoint input shape " + shape_string(in) + " is not a square image");
  if (in[0] != 3) throw ConfigError("checkpoint expects " + std::to_string(in[0]) + " channels, images have 3");

  DatasetPack single;
  single.image_size = in[1];
  single.channels = 3;
  single.labels = {0};
  single.pixels = planar_pixels(preprocess(image, box, in[1]));
  const std::size_t index = 0;
  const Tensor logits = net.forward(make_batch(single, std::span(&index, 1), checkpoint.normalization), Mode::eval);
  const Tensor probs = softmax(logits);

  InferenceResult r;
  r.probabilities.assign(probs.data(), probs.data() + probs.size());
  r.predicted = argmax(probs.values());
  r.class_name = net.class_names()[r.predicted];
  r.certainty = r.probabilities[r.predicted];
  return r;
}

std::string format_gradcheck_report(const GradCheckReport& report) {
  std::string out;
  char line[160];
  for (const auto& r : report.results) {
    std::snprintf(line, sizeof line, "%-14s configs=%zu values=%-6zu max_rel_err=%.3e %s\n", r.name.c_str(),
                  r.configurations, r.checked_values, r.max_relative_error, r.passed ? "ok" : "FAIL");
    out += line;
  }
  out += report.passed() ? "gradcheck passed\n" : "gradcheck FAILED\n";
  return out;
}

namespace {

struct PrepareFlags {
  std::string input_dir, output, crop = "center", face_boxes, split = "0.70,0.15,0.15";
  std::size_t size = 224, replicas = 19;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct TrainFlags {
  std::string data, arch = "woodnet", optimizer = "adam", checkpoint_dir = "checkpoints", init_from;
  std::size_t epochs = 25, batch_size = 32;
  double lr = 1e-3, dropout = 0.5;
  std::uint64_t seed = 0;
  bool freeze = false;
};

struct EvalFlags {
  std::string data, split = "test", checkpoint, out;
};

struct InferFlags {
  std::string checkpoint, face_boxes;
  std::vector<std::string> paths;
};

struct GradcheckFlags {
  std::string layer = "all";
  std::uint64_t seed = 0;
};

int cmd_prepare(const PrepareFlags& f, std::ostream& out) {
  PrepareOptions o;
  o.input_dir = f.input_dir;
  o.crop = crop_mode_from_string(f.crop);
  if (!f.face_boxes.empty()) o.face_boxes = f.face_boxes;
  if (o.crop == CropMode::face && !o.face_boxes) throw ConfigError("--crop face requires --face-boxes");
  o.size = f.size;
  o.replicas = f.replicas;
  o.split = SplitFractions::parse(f.split);
  o.seed = f.seed;
  o.workers = f.workers;

  PrepareReport report;
  const DatasetPack pack = prepare_dataset(o, &report);
  save_pack(f.output, pack);
  for (std::size_t c = 0; c < report.class_names.size(); ++c)
    out << report.class_names[c] << ": found " << report.found_per_class[c] << ", kept "
        << report.kept_per_class[c] << "\n";
  out << "samples: " << report.samples << "\n"
      << "train: " << report.train << " val: " << report.val << " test: " << report.test << "\n";
  return kExitOk;
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  TrainConfig c;
  c.arch = f.arch;
  c.data = f.data;
  c.checkpoint_dir = f.checkpoint_dir;
  if (!f.init_from.empty()) c.init_from = f.init_from;
  c.freeze_features = f.freeze;
  c.dropout = f.dropout;
  c.loop.epochs = f.epochs;
  c.loop.batch_size = f.batch_size;
  c.loop.learning_rate = f.lr;
  c.loop.optimizer = optimizer_from_string(f.optimizer);
  c.loop.seed = f.seed;
  const TrainRun run = run_training(c, &out);
  char line[128];
  std::snprintf(line, sizeof line, "Best val Acc: %.4f (epoch %zu)\n", run.result.best_val_accuracy,
                run.result.best_epoch);
  out << "\n" << line;
  return kExitOk;
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const DatasetPack data = load_pack(f.data);
  // Reject unknown split names before the (possibly slow) checkpoint load.
  data.splits.by_name(f.split);
  Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const EvalResult r = evaluate_split(ckpt.network, data, f.split, ckpt.normalization);
  nlohmann::json report = metrics_report(r.stats.loss, r.confusion);
  report["split"] = f.split;
  report["samples"] = r.stats.total;
  const std::string text = report.dump(2) + "\n";
  if (f.out.empty()) {
    out << text;
  } else {
    write_file(f.out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    char line[128];
    std::snprintf(line, sizeof line, "%s Loss: %.4f Acc: %.4f\n", f.split.c_str(), r.stats.loss, r.stats.accuracy);
    out << line;
  }
  return kExitOk;
}

const FaceBox* find_box(const std::vector<FaceBox>& boxes, const std::string& path) {
  const fs::path p(path);
  for (const auto& b : boxes) {
    const fs::path bp(b.image);
    if (bp == p || (!bp.has_parent_path() && bp == p.filename())) return &b;
  }
  return nullptr;
}

int cmd_infer(const InferFlags& f, std::ostream& out, std::ostream& err) {
  Checkpoint ckpt = load_checkpoint(f.checkpoint);
  std::vector<FaceBox> boxes;
  if (!f.face_boxes.empty()) boxes = read_face_boxes(f.face_boxes);
  const auto& names = ckpt.network.class_names();
  int status = kExitOk;
  for (const auto& path : f.paths) {
    try {
      const RawImage image = read_ppm(path);
      InferenceResult r = infer_image(ckpt, image, find_box(boxes, path));
      r.path = path;
      out << r.to_json(names).dump() << "\n";
    } catch (const Error& e) {
      out << nlohmann::json{{"path", path}, {"error", e.what()}}.dump() << "\n";
      err << path << ": " << e.what() << "\n";
      status = kExitData;
    }
  }
  return status;
}

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out) {
  const GradCheckReport report = run_gradcheck(f.layer, f.seed);
  out << format_gradcheck_report(report);
  return report.passed() ? kExitOk : kExitVerification;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"WoodNet face recognition toolkit", "woodnet"};
  app.require_subcommand(1);

  PrepareFlags pf;
  auto* prepare = app.add_subcommand("prepare", "Build a dataset pack from class directories of PPM images");
  prepare->add_option("--input-dir", pf.input_dir, "One subdirectory per class")->required();
  prepare->add_option("--output", pf.output, "Dataset pack to write")->required();
  prepare->add_option("--crop", pf.crop, "face or center")->check(CLI::IsMember({"face", "center"}));
  prepare->add_option("--face-boxes", pf.face_boxes, "JSON-lines face boxes");
  prepare->add_option("--size", pf.size, "Output side length")->check(CLI::PositiveNumber);
  prepare->add_option("--replicas", pf.replicas, "Augmented variants per original");
  prepare->add_option("--split", pf.split, "train,val,test fractions");
  prepare->add_option("--seed", pf.seed);
  prepare->add_option("--workers", pf.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train a network on a dataset pack");
  train->add_option("--data", tf.data, "Dataset pack")->required();
  train->add_option("--arch", tf.arch, "woodnet or badnet")->check(CLI::IsMember({"woodnet", "badnet"}));
  train->add_option("--epochs", tf.epochs);
  train->add_option("--batch-size", tf.batch_size);
  train->add_option("--lr", tf.lr);
  train->add_option("--optimizer", tf.optimizer)->check(CLI::IsMember({"adam", "sgd"}));
  train->add_option("--dropout", tf.dropout);
  train->add_option("--seed", tf.seed);
  train->add_option("--checkpoint-dir", tf.checkpoint_dir);
  train->add_option("--init-from", tf.init_from, "Pretrained checkpoint");
  train->add_flag("--freeze-features", tf.freeze, "Train only a fresh final layer");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  eval->add_option("--data", ef.data)->required();
  eval->add_option("--split", ef.split, "train, val or test");
  eval->add_option("--checkpoint", ef.checkpoint)->required();
  eval->add_option("--out", ef.out, "Metrics JSON path (default: stdout)");

  InferFlags inf;
  auto* infer = app.add_subcommand("infer", "Classify PPM images");
  infer->add_option("--checkpoint", inf.checkpoint)->required();
  infer->add_option("--face-boxes", inf.face_boxes);
  infer->add_option("paths", inf.paths, "Images")->required();

  GradcheckFlags gf;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  gradcheck->add_option("--layer", gf.layer, "Layer kind, cross_entropy, or all");
  gradcheck->add_option("--seed", gf.seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::Success&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (prepare->parsed()) return cmd_prepare(pf, out);
    if (train->parsed()) return cmd_train(tf, out);
    if (eval->parsed()) return cmd_eval(ef, out);
    if (infer->parsed()) return cmd_infer(inf, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(gf, out);
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& issue : e.issues()) err << "  " << issue << "\n";
    return kExitData;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(std::span<const std::string>(args), out, err);
}

}  // namespace woodnet
