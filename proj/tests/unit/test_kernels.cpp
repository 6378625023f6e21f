#include <gtest/gtest.h>

#include <omp.h>

#include "woodnet/kernels.hpp"
#include "woodnet/ops.hpp"
#include "woodnet/reference.hpp"
#include "woodnet/rng.hpp"

using namespace woodnet;

namespace {

template <typename T>
BasicTensor<T> random_tensor(Shape s, Rng& rng) {
  BasicTensor<T> t(std::move(s));
  for (auto& v : t.values()) v = static_cast<T>(uniform(rng, -1.0, 1.0));
  return t;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); }

class ThreadCount : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }
  int saved_ = 1;
};

}  // namespace

TEST(Conv2d, WindowSumsOfOnesKernel) {
  const auto x = TensorD::from({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const TensorD w({1, 1, 2, 2}, 1.0);
  const TensorD b({1}, 0.0);
  const auto expected = TensorD::from({1, 1, 2, 2}, {12, 16, 24, 28});
  EXPECT_EQ(kernels::conv2d_forward(x, w, b, 1, 0), expected);
  EXPECT_EQ(reference::conv2d_forward(x, w, b, 1, 0), expected);
}

TEST(Conv2d, ZeroKernelGivesBias) {
  Rng rng(1);
  const auto x = random_tensor<double>({2, 3, 5, 5}, rng);
  const auto y = kernels::conv2d_forward(x, TensorD({4, 3, 3, 3}), TensorD::from({4}, {1, -2, 3, 0.5}), 1, 1);
  for (std::size_t o = 0; o < 4; ++o)
    for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(y.at({1, o, i / 5, i % 5}), (std::vector<double>{1, -2, 3, 0.5}[o]));
}

TEST(Conv2d, RejectsNonIntegerOutputExtent) {
  EXPECT_THROW(kernels::conv2d_forward(TensorD({1, 1, 4, 4}), TensorD({1, 1, 3, 3}), TensorD({1}), 2, 0), ShapeError);
  EXPECT_THROW(kernels::conv2d_forward(TensorD({1, 2, 4, 4}), TensorD({1, 1, 3, 3}), TensorD({1}), 1, 0), ShapeError);
}

TEST(Conv2d, ZeroGradientGivesZeroGradients) {
  Rng rng(2);
  const auto x = random_tensor<double>({1, 2, 4, 4}, rng);
  const auto w = random_tensor<double>({3, 2, 3, 3}, rng);
  const auto g = kernels::conv2d_backward(x, w, TensorD({1, 3, 4, 4}), 1, 1);
  EXPECT_EQ(g.input, TensorD(x.shape()));
  EXPECT_EQ(g.weight, TensorD(w.shape()));
  EXPECT_EQ(g.bias, TensorD({3}));
}

TEST(Conv2d, BiasGradientIsGradientSum) {
  Rng rng(3);
  const auto x = random_tensor<double>({2, 2, 5, 5}, rng);
  const auto w = random_tensor<double>({3, 2, 3, 3}, rng);
  const auto go = random_tensor<double>({2, 3, 5, 5}, rng);
  const auto g = kernels::conv2d_backward(x, w, go, 1, 1);
  for (std::size_t o = 0; o < 3; ++o) {
    double s = 0;
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t i = 0; i < 25; ++i) s += go.at({b, o, i / 5, i % 5});
    EXPECT_NEAR(g.bias[o], s, 1e-12);
  }
}

TEST(Im2col, Col2imIsTheAdjoint) {
  // <im2col(x), c> == <x, col2im(c)> for every x, c.
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const ConvGeometry geo{pick(rng, 1, 3), pick(rng, 3, 7), pick(rng, 3, 7), 3, 3, 1, pick(rng, 0, 1)};
    const auto x = random_tensor<double>({geo.channels, geo.height, geo.width}, rng);
    const std::size_t n = geo.patch_size() * geo.out_height() * geo.out_width();
    const auto c = random_tensor<double>({n}, rng);
    std::vector<double> cols(n), back(x.size(), 0.0);
    kernels::im2col(x.data(), geo, cols.data());
    kernels::col2im(c.data(), geo, back.data());
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < n; ++i) lhs += cols[i] * c[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * back[i];
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST_P(ThreadCount, ConvMatchesReferenceExactlyInDouble) {
  Rng rng(stream_key({5, static_cast<std::uint64_t>(GetParam())}));
  int checked = 0;
  while (checked < 25) {
    const std::size_t b = pick(rng, 1, 2), c = pick(rng, 1, 8), h = pick(rng, 1, 16), w = pick(rng, 1, 16);
    const std::size_t o = pick(rng, 1, 8), k = pick(rng, 1, 5), s = pick(rng, 1, 3), p = pick(rng, 0, 2);
    const ConvGeometry geo{c, h, w, k, k, s, p};
    try {
      geo.validate();
    } catch (const ShapeError&) {
      continue;
    }
    const auto x = random_tensor<double>({b, c, h, w}, rng);
    const auto wt = random_tensor<double>({o, c, k, k}, rng);
    const auto bias = random_tensor<double>({o}, rng);
    const auto y = kernels::conv2d_forward(x, wt, bias, s, p);
    ASSERT_EQ(y, reference::conv2d_forward(x, wt, bias, s, p));
    const auto go = random_tensor<double>(y.shape(), rng);
    const auto g = kernels::conv2d_backward(x, wt, go, s, p);
    const auto gr = reference::conv2d_backward(x, wt, go, s, p);
    ASSERT_EQ(g.input, gr.input);
    ASSERT_EQ(g.weight, gr.weight);
    ASSERT_EQ(g.bias, gr.bias);
    ++checked;
  }
}

TEST_P(ThreadCount, ConvMatchesReferenceInFloat) {
  Rng rng(stream_key({6, static_cast<std::uint64_t>(GetParam())}));
  const auto x = random_tensor<float>({2, 8, 16, 16}, rng);
  const auto wt = random_tensor<float>({8, 8, 3, 3}, rng);
  const auto bias = random_tensor<float>({8}, rng);
  const auto y = kernels::conv2d_forward(x, wt, bias, 1, 1);
  const auto yr = reference::conv2d_forward(x, wt, bias, 1, 1);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], yr[i], 1e-6 * std::max(1.0f, std::abs(yr[i])));
}

TEST_P(ThreadCount, GemmMatchesReferenceForEveryTransposition) {
  Rng rng(stream_key({7, static_cast<std::uint64_t>(GetParam())}));
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = pick(rng, 1, 40), n = pick(rng, 1, 600), k = pick(rng, 1, 40);
    const Trans ta = rng() % 2 ? Trans::yes : Trans::no, tb = rng() % 2 ? Trans::yes : Trans::no;
    const auto a = random_tensor<double>({m * k}, rng), b = random_tensor<double>({k * n}, rng);
    auto c = random_tensor<double>({m * n}, rng);
    auto cr = c;
    const bool acc = rng() % 2;
    kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), c.data(), acc);
    reference::gemm(ta, tb, m, n, k, a.data(), b.data(), cr.data(), acc);
    ASSERT_EQ(c, cr) << "m=" << m << " n=" << n << " k=" << k;
  }
}

TEST_P(ThreadCount, MaxPoolMatchesReference) {
  Rng rng(stream_key({8, static_cast<std::uint64_t>(GetParam())}));
  const auto x = random_tensor<double>({2, 3, 8, 6}, rng);
  std::vector<std::uint32_t> a, ar;
  EXPECT_EQ(kernels::maxpool2x2_forward(x, a), reference::maxpool2x2_forward(x, ar));
  EXPECT_EQ(a, ar);
}

INSTANTIATE_TEST_SUITE_P(Threads, ThreadCount, ::testing::Values(1, 3, 8));

TEST(MaxPool, TiesPickFirstInWindow) {
  std::vector<std::uint32_t> arg;
  const auto y = kernels::maxpool2x2_forward(TensorD({1, 1, 2, 2}, 7.0), arg);
  EXPECT_EQ(y[0], 7.0);
  EXPECT_EQ(arg[0], 0u);
}
