#include "woodnet/train.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <variant>

#include "woodnet/checkpoint.hpp"
#include "woodnet/container.hpp"
#include "woodnet/ops.hpp"
#include "woodnet/optim.hpp"
#include "woodnet/rng.hpp"

namespace woodnet {

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ConfigError("optimizer must be adam or sgd, got '" + std::string(name) + "'");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::train: return "train";
    case Phase::val: return "val";
    case Phase::test: return "test";
  }
  return "?";
}

void LoopOptions::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

void TrainConfig::validate() const {
  loop.validate();
  if (freeze_features && !init_from)
    throw ConfigError("--freeze-features requires --init-from");
  if (!init_from && arch != "woodnet" && arch != "badnet")
    throw ConfigError("arch must be woodnet or badnet, got '" + arch + "'");
}

namespace {

void check_classes(const Network<float>& network, const DatasetPack& data) {
  if (network.class_names() != data.class_names)
    throw ConfigError("network predicts " + std::to_string(network.num_classes()) +
                      " classes, dataset has " + std::to_string(data.class_names.size()) +
                      " (or their names differ)");
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

EvalResult evaluate(Network<float>& network, const DatasetPack& data,
                    std::span<const std::size_t> indices, const Normalization& normalization,
                    std::size_t batch_size) {
  check_classes(network, data);
  if (indices.empty()) throw InputError("cannot evaluate an empty split");
  const std::size_t classes = network.num_classes();
  EvalResult r{EpochStats{}, ConfusionMatrix(data.class_names), Tensor({indices.size(), classes})};
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto chunk = indices.subspan(start, std::min(batch_size, indices.size() - start));
    const Tensor logits = network.forward(make_batch(data, chunk, normalization), Mode::eval);
    const auto labels = batch_labels(data, chunk);
    const auto loss = cross_entropy(logits, labels);
    loss_sum += static_cast<double>(loss.mean_loss) * static_cast<double>(chunk.size());
    const auto predicted = argmax(logits, 1);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      r.confusion.accumulate(labels[i], predicted[i]);
      std::copy_n(logits.data() + i * classes, classes, r.logits.data() + (start + i) * classes);
    }
  }
  r.stats.total = indices.size();
  r.stats.correct = static_cast<std::size_t>(r.confusion.trace());
  r.stats.loss = loss_sum / static_cast<double>(indices.size());
  r.stats.accuracy = static_cast<double>(r.stats.correct) / static_cast<double>(r.stats.total);
  return r;
}

EvalResult evaluate_split(Network<float>& network, const DatasetPack& data, std::string_view split,
                          const Normalization& normalization) {
  auto r = evaluate(network, data, data.splits.by_name(split), normalization);
  r.stats.phase = split == "train" ? Phase::train : split == "val" ? Phase::val : Phase::test;
  return r;
}

std::string format_epoch_log(std::size_t epoch, std::size_t total_epochs,
                             std::span<const EpochStats> phases) {
  std::string out = "Epoch " + std::to_string(epoch) + "/" +
                    std::to_string(total_epochs == 0 ? 0 : total_epochs - 1) + "\n----------\n";
  for (const auto& s : phases)
    out += std::string(to_string(s.phase)) + " Loss: " + fixed4(s.loss) + " Acc: " + fixed4(s.accuracy) + "\n";
  return out;
}

std::string format_stats_csv(std::span<const EpochStats> history) {
  std::string out = "epoch,phase,images_seen,loss,acc\n";
  char buf[160];
  for (const auto& s : history) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%zu,%.6f,%.6f\n", s.epoch, std::string(to_string(s.phase)).c_str(),
                  s.images_seen, s.loss, s.accuracy);
    out += buf;
  }
  return out;
}

TrainResult train_network(Network<float>& network, const DatasetPack& data,
                          const LoopOptions& options, std::ostream* log) {
  options.validate();
  check_classes(network, data);
  if (data.splits.train.empty()) throw InputError("training split is empty");
  if (data.splits.val.empty()) throw InputError("validation split is empty");
  const Normalization& norm = data.normalization;

  std::variant<Adam<float>, double> optimizer = options.optimizer == OptimizerKind::adam
      ? std::variant<Adam<float>, double>(Adam<float>(AdamConfig{options.learning_rate}))
      : std::variant<Adam<float>, double>(options.learning_rate);
  network.set_seed(options.seed);
  auto params = network.parameters();

  TrainResult result{{}, network, -1.0, 0, 0};
  std::size_t images_seen = 0;
  const auto& train_ids = data.splits.train;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<std::size_t> order = train_ids;
    Rng rng = make_rng(options.seed, StreamPurpose::shuffle, {epoch});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const auto chunk = std::span(order).subspan(start, std::min(options.batch_size, order.size() - start));
      const auto labels = batch_labels(data, chunk);
      network.zero_grad();
      const Tensor logits = network.forward(make_batch(data, chunk, norm), Mode::train);
      const auto loss = cross_entropy(logits, labels);
      network.backward(loss.grad_logits);
      if (auto* adam = std::get_if<Adam<float>>(&optimizer))
        adam->step(params);
      else
        sgd_step<float>(params, std::get<double>(optimizer));
      network.advance_step();

      loss_sum += static_cast<double>(loss.mean_loss) * static_cast<double>(chunk.size());
      const auto predicted = argmax(logits, 1);
      for (std::size_t i = 0; i < chunk.size(); ++i) correct += predicted[i] == labels[i];
      images_seen += chunk.size();
    }

    EpochStats train_stats{Phase::train, epoch, loss_sum / static_cast<double>(order.size()),
                           static_cast<double>(correct) / static_cast<double>(order.size()),
                           correct, order.size(), images_seen};
    EvalResult val = evaluate(network, data, data.splits.val, norm);
    val.stats.phase = Phase::val;
    val.stats.epoch = epoch;
    val.stats.images_seen = images_seen;
    result.history.push_back(train_stats);
    result.history.push_back(val.stats);

    if (log) {
      if (epoch > 0) *log << "\n";
      const EpochStats phases[] = {train_stats, val.stats};
      *log << format_epoch_log(epoch, options.epochs, phases) << std::flush;
    }

    if (val.stats.accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = val.stats.accuracy;
      result.best_epoch = epoch;
      result.best_network = network;
      ++result.best_saves;
      if (options.checkpoint_dir)
        save_checkpoint(*options.checkpoint_dir / "best.ckpt", network, norm,
                        TrainingMeta{epoch, val.stats.accuracy, options.seed});
    }
  }

  if (options.checkpoint_dir) {
    save_checkpoint(*options.checkpoint_dir / "final.ckpt", network, norm,
                    TrainingMeta{options.epochs - 1, result.best_val_accuracy, options.seed});
    const std::string csv = format_stats_csv(result.history);
    write_file(*options.checkpoint_dir / "stats.csv",
               std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  }
  return result;
}

WoodNetOptions woodnet_options_for(std::size_t image_size, std::vector<std::string> class_names,
                                   double dropout_p) {
  WoodNetOptions o;
  o.input_size = image_size;
  o.dropout_p = dropout_p;
  o.class_names = std::move(class_names);
  if (image_size == 224) return o;
  const std::vector<std::size_t> widths{16, 32, 64, 64, 64};
  o.channels.clear();
  std::size_t side = image_size;
  while (o.channels.size() < widths.size() && side % 2 == 0 && side / 2 >= 4) {
    o.channels.push_back(widths[o.channels.size()]);
    side /= 2;
  }
  if (o.channels.empty())
    throw ConfigError("image size " + std::to_string(image_size) + " too small for woodnet");
  o.hidden = {512, 256};
  return o;
}

TrainRun run_training(const TrainConfig& config, std::ostream* log) {
  config.validate();
  const DatasetPack data = load_pack(config.data);

  auto network = [&]() -> Network<float> {
    if (config.init_from) {
      Checkpoint ckpt = load_checkpoint(*config.init_from);
      if (config.freeze_features) return adapt_for_transfer(ckpt.network, data.class_names, config.loop.seed);
      if (ckpt.network.class_names() == data.class_names) {
        for (std::size_t i = 0; i < ckpt.network.num_layers(); ++i) ckpt.network.layer(i).set_trainable(true);
        return std::move(ckpt.network);
      }
      Network<float> adapted = adapt_for_transfer(ckpt.network, data.class_names, config.loop.seed);
      for (std::size_t i = 0; i < adapted.num_layers(); ++i) adapted.layer(i).set_trainable(true);
      return adapted;
    }
    const NetworkSpec spec = config.arch == "woodnet"
        ? woodnet_spec(woodnet_options_for(data.image_size, data.class_names, config.dropout))
        : badnet_spec(data.image_size, 256, data.class_names);
    Network<float> net(spec, config.loop.seed);
    init_weights(net, config.loop.seed);
    return net;
  }();

  std::filesystem::create_directories(config.checkpoint_dir);
  LoopOptions loop = config.loop;
  loop.checkpoint_dir = config.checkpoint_dir;
  TrainResult result = train_network(network, data, loop, log);
  return TrainRun{std::move(network), std::move(result)};
}

}  // namespace woodnet
