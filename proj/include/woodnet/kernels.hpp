#pragma once

// OpenMP-parallel compute kernels. Every kernel here has a serial twin in
// reference.hpp that the tests use as an oracle. The parallel versions keep
// the per-element accumulation order of the references, so float64 results
// match exactly.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "woodnet/tensor.hpp"

namespace woodnet {

enum class Trans { no, yes };

// Geometry of a 2-D cross-correlation over one C×H×W image.
struct ConvGeometry {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;

  // Throws ShapeError unless both output extents are positive integers.
  void validate() const;
  std::size_t out_height() const { return (height + 2 * padding - kernel_h) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel_w) / stride + 1; }
  std::size_t patch_size() const { return channels * kernel_h * kernel_w; }
};

template <typename T>
struct ConvGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

namespace kernels {

// C (m×n) = op(A) · op(B), where op(A) is m×k and op(B) is k×n. With
// `accumulate` the product is added to C instead of overwriting it.
template <typename T>
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate = false);

// Unrolls the patches of one image into a (C·kh·kw) × (H'·W') matrix;
// out-of-image taps become zero.
template <typename T>
void im2col(const T* image, const ConvGeometry& geo, T* cols);

// Adjoint of im2col: scatters-adds columns back into an image buffer.
template <typename T>
void col2im(const T* cols, const ConvGeometry& geo, T* image);

// input B×C×H×W, weight O×C×kh×kw, bias O -> B×O×H'×W'.
template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                              const BasicTensor<T>& bias, std::size_t stride,
                              std::size_t padding);

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                             const BasicTensor<T>& grad_out, std::size_t stride,
                             std::size_t padding);

// 2×2/stride-2 max pooling. `argmax` receives, per output element, the flat
// input index that won (first in row-major window order on ties).
template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& input, std::vector<std::uint32_t>& argmax);

}  // namespace kernels
}  // namespace woodnet
