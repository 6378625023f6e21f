#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "synthetic.hpp"
#include "woodnet/datapipe.hpp"
#include "woodnet/error.hpp"
#include "woodnet/rng.hpp"

using namespace woodnet;

namespace {

std::vector<std::size_t> sorted_union(const SplitAssignment& s) {
  std::vector<std::size_t> all;
  for (const auto* v : {&s.train, &s.val, &s.test}) all.insert(all.end(), v->begin(), v->end());
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST(Balance, ReducesToSmallestClass) {
  const std::vector<std::size_t> counts{10, 8, 12, 9};
  const auto sel = balance_classes(counts, 3);
  ASSERT_EQ(sel.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(sel[c].size(), 8u);
    EXPECT_TRUE(std::is_sorted(sel[c].begin(), sel[c].end()));
    EXPECT_EQ(std::set<std::size_t>(sel[c].begin(), sel[c].end()).size(), 8u);
    EXPECT_LT(sel[c].back(), counts[c]);
  }
}

TEST(Balance, AlreadyBalancedKeepsEverything) {
  const std::vector<std::size_t> counts{5, 5, 5};
  std::vector<std::size_t> all(5);
  std::iota(all.begin(), all.end(), 0);
  for (const auto& s : balance_classes(counts, 1)) EXPECT_EQ(s, all);
}

TEST(Balance, SeededAndFullScale) {
  const std::vector<std::size_t> counts{9400, 7812, 8655, 12001};
  const auto a = balance_classes(counts, 7);
  EXPECT_EQ(a, balance_classes(counts, 7));
  EXPECT_NE(a, balance_classes(counts, 8));
  for (const auto& s : a) EXPECT_EQ(s.size(), 7812u);
}

TEST(Balance, EmptyClassRejected) {
  const std::vector<std::size_t> counts{3, 0};
  EXPECT_THROW(balance_classes(counts, 1), InputError);
  EXPECT_THROW(balance_classes(std::vector<std::size_t>{}, 1), InputError);
}

TEST(Expand, Counts) {
  EXPECT_EQ(expanded_count(7812, 19), 156240u);
  EXPECT_EQ(expanded_count(31, 0), 31u);
}

TEST(Split, FullScaleSizes) {
  const std::vector<std::size_t> groups(156240, 1);
  const auto s = split_dataset(groups, {}, 1);
  EXPECT_EQ(s.train.size(), 109368u);
  EXPECT_EQ(s.val.size(), 23436u);
  EXPECT_EQ(s.test.size(), 23436u);
  const std::vector<std::size_t> grouped(7812, 20);
  const auto g = split_dataset(grouped, {}, 1);
  EXPECT_EQ(g.train.size(), 5468u * 20);
  EXPECT_EQ(g.train.size() + g.val.size() + g.test.size(), 156240u);
}

TEST(Split, SingleGroupGoesToTrain) {
  const std::vector<std::size_t> groups{20};
  const auto s = split_dataset(groups, {}, 1);
  EXPECT_EQ(s.train.size(), 20u);
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(Split, PartitionWithoutStraddlingGroups) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> groups(1 + rng() % 60);
    for (auto& g : groups) g = 1 + rng() % 5;
    const auto s = split_dataset(groups, {}, trial);
    const std::size_t n = std::accumulate(groups.begin(), groups.end(), std::size_t{0});
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    ASSERT_EQ(sorted_union(s), expect);
    std::vector<int> where(n);
    for (std::size_t i : s.val) where[i] = 1;
    for (std::size_t i : s.test) where[i] = 2;
    std::size_t start = 0;
    for (std::size_t g : groups) {
      for (std::size_t k = 1; k < g; ++k) ASSERT_EQ(where[start + k], where[start]);
      start += g;
    }
    for (const auto* v : {&s.train, &s.val, &s.test}) ASSERT_TRUE(std::is_sorted(v->begin(), v->end()));
  }
}

TEST(Split, SeedChangesAssignment) {
  const std::vector<std::size_t> groups(40, 2);
  EXPECT_EQ(split_dataset(groups, {}, 3).val, split_dataset(groups, {}, 3).val);
  EXPECT_NE(split_dataset(groups, {}, 3).val, split_dataset(groups, {}, 4).val);
}

TEST(Split, FractionParsing) {
  const auto f = SplitFractions::parse("0.8,0.1,0.1");
  EXPECT_DOUBLE_EQ(f.train, 0.8);
  EXPECT_THROW(SplitFractions::parse("0.8,0.1,0.2"), ConfigError);
  EXPECT_THROW(SplitFractions::parse("0.8,0.2"), ConfigError);
  EXPECT_THROW(SplitFractions::parse("1.2,-0.1,-0.1"), ConfigError);
  EXPECT_THROW(SplitFractions::parse("a,b,c"), ConfigError);
}

TEST(Normalization, AllBlackFloorsStd) {
  const std::vector<std::uint8_t> px(2 * 3 * 4, 0);
  const std::vector<std::size_t> samples{0, 1};
  const auto n = compute_normalization(px, 3, 2, samples);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(n.mean[c], 0.0);
    EXPECT_EQ(n.std[c], 1e-6);
  }
}

TEST(Normalization, ConstantMean) {
  const std::vector<std::uint8_t> px(3 * 4, 128);
  const std::vector<std::size_t> samples{0};
  const auto n = compute_normalization(px, 3, 2, samples);
  for (double m : n.mean) EXPECT_NEAR(m, 128.0 / 255.0, 1e-12);
}

TEST(Normalization, TwoValueMoments) {
  std::vector<std::uint8_t> px(3 * 4);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = i % 2 ? 255 : 0;
  const std::vector<std::size_t> samples{0};
  const auto n = compute_normalization(px, 3, 2, samples);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(n.mean[c], 0.5, 1e-12);
    EXPECT_NEAR(n.std[c], 0.5, 1e-12);
  }
}

TEST(Normalization, OnlyListedSamplesCount) {
  std::vector<std::uint8_t> px(2 * 3, 0);
  std::fill(px.begin() + 3, px.end(), 255);
  const std::vector<std::size_t> first{0};
  EXPECT_EQ(compute_normalization(px, 3, 1, first).mean[0], 0.0);
}

class PackFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto train = woodnet::testing::pattern_set({{0}, {4}}, 3, 8, 1);
    const auto val = woodnet::testing::pattern_set({{0}, {4}}, 1, 8, 2);
    pack = woodnet::testing::make_pack({"a", "b"}, train, val, val);
    pack.seed = 77;
    pack.crop_mode = CropMode::face;
    pack.replicas = 2;
  }
  DatasetPack pack;
};

TEST_F(PackFixture, RoundTrip) {
  const auto bytes = encode_pack(pack);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "WOODSET1");
  const auto back = decode_pack(bytes);
  EXPECT_EQ(back.pixels, pack.pixels);
  EXPECT_EQ(back.labels, pack.labels);
  EXPECT_EQ(back.class_names, pack.class_names);
  EXPECT_EQ(back.splits.train, pack.splits.train);
  EXPECT_EQ(back.splits.test, pack.splits.test);
  EXPECT_EQ(back.normalization, pack.normalization);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.crop_mode, CropMode::face);
  EXPECT_EQ(encode_pack(back), bytes);
}

TEST_F(PackFixture, CorruptionRejected) {
  const auto bytes = encode_pack(pack);
  EXPECT_THROW(decode_pack(std::span(bytes).first(bytes.size() - 1)), FormatError);
  auto bad = bytes;
  bad[3] = 'X';
  EXPECT_THROW(decode_pack(bad), FormatError);
  auto label = pack;
  label.labels[0] = 5;
  EXPECT_THROW(decode_pack(encode_pack(label)), FormatError);
}

TEST_F(PackFixture, FileRoundTrip) {
  woodnet::testing::TempDir dir("pack");
  save_pack(dir / "d.pack", pack);
  EXPECT_EQ(load_pack(dir / "d.pack").pixels, pack.pixels);
  EXPECT_THROW(load_pack(dir / "none.pack"), Error);
}

TEST_F(PackFixture, MakeBatchNormalizes) {
  const Normalization norm{{0.5, 0.25, 0.0}, {0.5, 0.25, 2.0}};
  const std::vector<std::size_t> idx{4, 1};
  const auto batch = make_batch(pack, idx, norm);
  ASSERT_EQ(batch.shape(), (Shape{2, 3, 8, 8}));
  for (std::size_t b = 0; b < 2; ++b) {
    const auto px = pack.sample(idx[b]);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < 64; ++k) {
        const double expect = (px[c * 64 + k] / 255.0 - norm.mean[c]) / norm.std[c];
        ASSERT_NEAR(batch.at({b, c, k / 8, k % 8}), expect, 1e-6);
      }
  }
  EXPECT_EQ(batch_labels(pack, idx), (std::vector<std::size_t>{pack.labels[4], pack.labels[1]}));
}
