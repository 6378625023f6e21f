#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "woodnet/datapipe.hpp"
#include "woodnet/metrics.hpp"
#include "woodnet/models.hpp"

namespace woodnet {

enum class OptimizerKind { adam, sgd };
OptimizerKind optimizer_from_string(std::string_view name);

enum class Phase { train, val, test };
std::string_view to_string(Phase phase);

struct EpochStats {
  Phase phase = Phase::train;
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t images_seen = 0;  // cumulative training images at the end of this phase
};

struct LoopOptions {
  std::size_t epochs = 25;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  // When set, best.ckpt / final.ckpt / stats.csv are written here.
  std::optional<std::filesystem::path> checkpoint_dir;

  void validate() const;
};

struct TrainResult {
  std::vector<EpochStats> history;
  Network<float> best_network;
  double best_val_accuracy = -1.0;
  std::size_t best_epoch = 0;
  std::size_t best_saves = 0;
};

struct EvalResult {
  EpochStats stats;
  ConfusionMatrix confusion;
  Tensor logits;  // N×M, in split order
};

// Eval-mode pass over `indices`; never mutates parameters. Throws ConfigError
// when the network's classes disagree with the dataset's.
EvalResult evaluate(Network<float>& network, const DatasetPack& data,
                    std::span<const std::size_t> indices, const Normalization& normalization,
                    std::size_t batch_size = 64);
EvalResult evaluate_split(Network<float>& network, const DatasetPack& data, std::string_view split,
                          const Normalization& normalization);

// "Epoch e/E-1", a dashed rule, then one "<phase> Loss: x.xxxx Acc: x.xxxx"
// line per phase.
std::string format_epoch_log(std::size_t epoch, std::size_t total_epochs,
                             std::span<const EpochStats> phases);

// epoch,phase,images_seen,loss,acc
std::string format_stats_csv(std::span<const EpochStats> history);

// Epoch loop: seeded shuffle, minibatch Adam/SGD steps with dropout on, then
// a full eval-mode validation pass. The best network is kept whenever
// validation accuracy strictly improves. `network` holds the final state.
TrainResult train_network(Network<float>& network, const DatasetPack& data,
                          const LoopOptions& options, std::ostream* log = nullptr);

// Architecture sized for `image_size` inputs: the full WoodNet at 224,
// otherwise as many blocks as halve the side down to no less than 4.
WoodNetOptions woodnet_options_for(std::size_t image_size, std::vector<std::string> class_names,
                                   double dropout_p);

struct TrainConfig {
  std::string arch = "woodnet";
  std::filesystem::path data;
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::optional<std::filesystem::path> init_from;
  bool freeze_features = false;
  double dropout = 0.5;
  LoopOptions loop;

  void validate() const;
};

struct TrainRun {
  Network<float> network;  // final state
  TrainResult result;
};

// Loads the pack, builds or adapts the network, runs train_network and writes
// checkpoints plus the CSV into config.checkpoint_dir.
TrainRun run_training(const TrainConfig& config, std::ostream* log = nullptr);

}  // namespace woodnet
