#include <gtest/gtest.h>

#include <cmath>

#include "woodnet/error.hpp"
#include "woodnet/ops.hpp"
#include "woodnet/tensor.hpp"

using namespace woodnet;

TEST(Tensor, SizeMatchesShapeProduct) {
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(shape_size(t.shape()), t.size());
}

TEST(Tensor, RejectsDataOfWrongLength) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor({0, 3}), ShapeError);
}

TEST(Tensor, ReshapeKeepsElementsAndRejectsNewCount) {
  const auto t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto r = t.reshape({3, 2});
  EXPECT_EQ(r.shape(), (Shape{3, 2}));
  EXPECT_EQ(r.at({2, 1}), 6.0f);
  EXPECT_EQ(t.shape(), (Shape{2, 3}));
  EXPECT_THROW(t.reshape({4, 2}), ShapeError);
}

TEST(Tensor, RowMajorIndexing) {
  const auto t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.at({1, 0}), 4.0f);
  EXPECT_EQ(t.at({0, 2}), 3.0f);
  EXPECT_THROW(t.at({2, 0}), ShapeError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const auto eye = TensorD::from({2, 2}, {1, 0, 0, 1});
  const auto m = TensorD::from({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(matmul(eye, m), m);
}

TEST(Matmul, RowTimesColumnIsDotProduct) {
  const auto a = TensorD::from({1, 2}, {1, 2});
  const auto b = TensorD::from({2, 1}, {3, 4});
  EXPECT_EQ(matmul(a, b), TensorD::from({1, 1}, {11}));
}

TEST(Matmul, ZerosAnnihilate) {
  TensorD b({4, 5});
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<double>(i) - 7.5;
  EXPECT_EQ(matmul(TensorD({3, 4}), b), TensorD({3, 5}));
}

TEST(Matmul, InnerDimensionMismatchThrows) {
  EXPECT_THROW(matmul(Tensor({2, 3}), Tensor({2, 3})), ShapeError);
}

TEST(Elementwise, MaxWithZero) {
  EXPECT_EQ(elementwise(UnaryOp::max_with_zero, Tensor::from({3}, {-3, 0, 5})), Tensor::from({3}, {0, 0, 5}));
}

TEST(Elementwise, Add) {
  EXPECT_EQ(elementwise(BinaryOp::add, Tensor::from({2}, {1, 2}), Tensor::from({2}, {3, 4})), Tensor::from({2}, {4, 6}));
}

TEST(Elementwise, ShapeMismatchThrows) {
  EXPECT_THROW(elementwise(BinaryOp::mul, Tensor({2}), Tensor({3})), ShapeError);
}

TEST(Elementwise, LogOfNonPositiveIsDomainError) {
  EXPECT_THROW(elementwise(UnaryOp::ln, TensorD::from({2}, {1.0, 0.0})), DomainError);
  const auto e = elementwise(UnaryOp::exp, elementwise(UnaryOp::ln, TensorD::from({2}, {2.0, 3.0})));
  EXPECT_NEAR(e[0], 2.0, 1e-15);
  EXPECT_NEAR(e[1], 3.0, 1e-15);
}

TEST(Scale, HalvesValues) {
  EXPECT_EQ(scale(Tensor::from({2}, {1, 2}), 0.5f), Tensor::from({2}, {0.5f, 1.0f}));
}

TEST(Reduce, SumOverAxisZero) {
  EXPECT_EQ(reduce(ReduceOp::sum, TensorD::from({2, 2}, {1, 2, 3, 4}), 0), TensorD::from({2}, {4, 6}));
}

TEST(Reduce, MeanOverAxisOne) {
  EXPECT_EQ(reduce(ReduceOp::mean, TensorD::from({2, 2}, {1, 2, 3, 4}), 1), TensorD::from({2}, {1.5, 3.5}));
  EXPECT_THROW(reduce(ReduceOp::sum, TensorD({2, 2}), 2), ShapeError);
}

TEST(Argmax, PicksLargest) {
  const std::vector<float> v{0.1f, 0.7f, 0.1f, 0.1f};
  EXPECT_EQ(argmax(std::span<const float>(v)), 1u);
}

TEST(Argmax, TiesGoToLowestIndex) {
  const std::vector<double> v{0.5, 0.5};
  EXPECT_EQ(argmax(std::span<const double>(v)), 0u);
  EXPECT_EQ(argmax(TensorD::from({2, 3}, {1, 3, 3, 9, 9, 2}), 1), (std::vector<std::size_t>{1, 0}));
}
