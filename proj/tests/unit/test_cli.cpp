#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "synthetic.hpp"
#include "woodnet/checkpoint.hpp"
#include "woodnet/cli.hpp"
#include "woodnet/image.hpp"

using namespace woodnet;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::span<const std::string>(args), out, err);
  return {code, out.str(), err.str()};
}

std::string text_of(const fs::path& p) {
  const auto b = woodnet::testing::file_bytes(p);
  return {b.begin(), b.end()};
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::vector<std::vector<float>> frozen_values(const Checkpoint& ck) {
  std::vector<std::vector<float>> out;
  const auto params = ck.network.parameters();
  for (std::size_t i = 0; i + 2 < params.size(); ++i)
    out.emplace_back(params[i]->value.values().begin(), params[i]->value.values().end());
  return out;
}

// Shared fixture: a prepared 16×16 pack and one short training run.
class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new woodnet::testing::TempDir("cli");
    woodnet::testing::write_image_tree(dir_->path() / "raw", default_class_names(), 2, 24, 16, 3);
    const auto prep = cli({"prepare", "--input-dir", (dir_->path() / "raw").string(), "--output",
                           pack().string(), "--size", "16", "--replicas", "4", "--seed", "2"});
    ASSERT_EQ(prep.code, 0) << prep.err;
    const auto train = cli({"train", "--data", pack().string(), "--epochs", "1", "--batch-size", "8",
                            "--seed", "7", "--checkpoint-dir", (dir_->path() / "run").string()});
    ASSERT_EQ(train.code, 0) << train.err;
    train_out_ = new std::string(train.out);
  }
  static void TearDownTestSuite() {
    delete dir_;
    delete train_out_;
  }
  static fs::path pack() { return dir_->path() / "data.pack"; }
  static fs::path run_dir() { return dir_->path() / "run"; }
  static fs::path path(const std::string& name) { return dir_->path() / name; }

  static woodnet::testing::TempDir* dir_;
  static std::string* train_out_;
};

woodnet::testing::TempDir* CliFlow::dir_ = nullptr;
std::string* CliFlow::train_out_ = nullptr;

}  // namespace

TEST_F(CliFlow, PrepareReportsCountsAndIsReproducible) {
  const auto again = cli({"prepare", "--input-dir", (dir_->path() / "raw").string(), "--output",
                          path("again.pack").string(), "--size", "16", "--replicas", "4", "--seed", "2"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_NE(again.out.find("Kjartan"), std::string::npos);
  EXPECT_NE(again.out.find("train"), std::string::npos);
  EXPECT_EQ(woodnet::testing::file_bytes(path("again.pack")), woodnet::testing::file_bytes(pack()));
  EXPECT_EQ(load_pack(pack()).sample_count(), 40u);
}

TEST_F(CliFlow, OneEpochWritesTwoCheckpoints) {
  std::size_t ckpts = 0;
  for (const auto& e : fs::directory_iterator(run_dir())) ckpts += e.path().extension() == ".ckpt";
  EXPECT_EQ(ckpts, 2u);
  EXPECT_TRUE(fs::exists(run_dir() / "best.ckpt"));
  EXPECT_TRUE(fs::exists(run_dir() / "final.ckpt"));
  EXPECT_EQ(train_out_->rfind("Epoch 0/0\n----------\ntrain Loss: ", 0), 0u);
  EXPECT_NE(train_out_->find("Best val Acc: "), std::string::npos);
}

TEST_F(CliFlow, SameSeedSameCsv) {
  const auto r = cli({"train", "--data", pack().string(), "--epochs", "1", "--batch-size", "8", "--seed", "7",
                      "--checkpoint-dir", path("run2").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(text_of(path("run2") / "stats.csv"), text_of(run_dir() / "stats.csv"));
  EXPECT_EQ(r.out, *train_out_);
}

TEST_F(CliFlow, FreezeFeaturesKeepsDonorWeights) {
  const auto r = cli({"train", "--data", pack().string(), "--epochs", "2", "--batch-size", "8", "--init-from",
                      (run_dir() / "final.ckpt").string(), "--freeze-features", "--checkpoint-dir",
                      path("frozen").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto donor = load_checkpoint(run_dir() / "final.ckpt");
  const auto tuned = load_checkpoint(path("frozen") / "final.ckpt");
  EXPECT_EQ(frozen_values(tuned), frozen_values(donor));
  for (std::size_t i = 0; i + 1 < tuned.network.num_layers(); ++i)
    EXPECT_FALSE(tuned.network.layer(i).trainable());
}

TEST_F(CliFlow, EvalIsDeterministicJson) {
  const auto a = cli({"eval", "--data", pack().string(), "--checkpoint", (run_dir() / "best.ckpt").string()});
  const auto b = cli({"eval", "--data", pack().string(), "--checkpoint", (run_dir() / "best.ckpt").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["split"], "test");
  for (const char* key : {"loss", "accuracy", "precision", "recall", "confusion", "class_names"})
    EXPECT_TRUE(j.contains(key)) << key;
  const auto r = cli({"eval", "--data", pack().string(), "--checkpoint", (run_dir() / "best.ckpt").string(),
                      "--split", "train", "--out", path("eval.json").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(text_of(path("eval.json")))["split"], "train");
}

TEST_F(CliFlow, EvalUnknownSplitIsUsageError) {
  EXPECT_EQ(cli({"eval", "--data", pack().string(), "--checkpoint", (run_dir() / "best.ckpt").string(),
                 "--split", "holdout"}).code,
            1);
}

TEST_F(CliFlow, InferEmitsProbabilities) {
  const auto img = (dir_->path() / "raw" / "Lars" / "img0.ppm").string();
  const auto r = cli({"infer", "--checkpoint", (run_dir() / "best.ckpt").string(), img});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  double sum = 0, top = 0;
  for (const auto& [name, p] : lines[0]["probabilities"].items()) {
    sum += p.get<double>();
    top = std::max(top, p.get<double>());
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
  EXPECT_EQ(lines[0]["certainty"].get<double>(), top);
  EXPECT_EQ(lines[0]["probabilities"][lines[0]["class"].get<std::string>()].get<double>(), top);
  EXPECT_EQ(lines[0]["path"], img);
}

TEST_F(CliFlow, InferContinuesPastBadImage) {
  { std::ofstream(path("bad.ppm")) << "P6\n4 4\n255\n"; }
  const auto good = (dir_->path() / "raw" / "Morgan" / "img1.ppm").string();
  const auto r = cli({"infer", "--checkpoint", (run_dir() / "best.ckpt").string(), path("bad.ppm").string(), good});
  EXPECT_EQ(r.code, 2);
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_TRUE(lines[0].contains("error"));
  EXPECT_TRUE(lines[1].contains("probabilities"));
}

TEST_F(CliFlow, CenteredBoxMatchesCenterCrop) {
  const auto img = (dir_->path() / "raw" / "Other" / "img0.ppm").string();
  { std::ofstream(path("boxes.jsonl")) << nlohmann::json{{"image", img}, {"x", 4}, {"y", 0}, {"w", 16}, {"h", 16}}.dump() << "\n"; }
  const auto plain = cli({"infer", "--checkpoint", (run_dir() / "best.ckpt").string(), img});
  const auto boxed = cli({"infer", "--checkpoint", (run_dir() / "best.ckpt").string(), "--face-boxes",
                          path("boxes.jsonl").string(), img});
  ASSERT_EQ(plain.code, 0);
  ASSERT_EQ(boxed.code, 0);
  EXPECT_EQ(plain.out, boxed.out);
}

TEST(Cli, GradcheckPasses) {
  const auto r = cli({"gradcheck", "--layer", "all", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* kind : {"conv2d", "maxpool2d", "relu", "linear", "dropout", "flatten"})
    EXPECT_NE(r.out.find(kind), std::string::npos) << kind;
}

TEST(Cli, GradcheckFailureMapsToVerificationExit) {
  GradCheckReport report;
  report.results.push_back(GradCheckResult{"linear", 0.9, 5, 40, false});
  EXPECT_FALSE(report.passed());
  EXPECT_NE(format_gradcheck_report(report).find("linear"), std::string::npos);
  EXPECT_EQ(cli({"gradcheck", "--layer", "softmax"}).code, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"fly"}).code, 1);
  EXPECT_EQ(cli({"train", "--data", "x.pack", "--freeze-features"}).code, 1);
  EXPECT_EQ(cli({"train", "--data", "x.pack", "--arch", "resnet"}).code, 1);
  EXPECT_EQ(cli({"prepare", "--output", "x.pack"}).code, 1);
}

TEST(Cli, DataErrors) {
  woodnet::testing::TempDir dir("clierr");
  EXPECT_EQ(cli({"train", "--data", (dir / "missing.pack").string()}).code, 2);
  { std::ofstream(dir / "junk.pack") << "WOODSET1 not really"; }
  EXPECT_EQ(cli({"train", "--data", (dir / "junk.pack").string()}).code, 2);
  EXPECT_EQ(cli({"prepare", "--input-dir", (dir / "none").string(), "--output", (dir / "o.pack").string()}).code, 2);
}
