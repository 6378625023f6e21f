#include "woodnet/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>

namespace woodnet {

void ConvGeometry::validate() const {
  const auto fail = [&](const std::string& why) {
    throw ShapeError("conv2d: " + why + " (input " + std::to_string(height) + "x" +
                     std::to_string(width) + ", kernel " + std::to_string(kernel_h) + "x" +
                     std::to_string(kernel_w) + ", stride " + std::to_string(stride) +
                     ", padding " + std::to_string(padding) + ")");
  };
  if (channels == 0 || height == 0 || width == 0 || kernel_h == 0 || kernel_w == 0)
    fail("zero extent");
  if (stride == 0) fail("stride must be positive");
  if (height + 2 * padding < kernel_h || width + 2 * padding < kernel_w)
    fail("kernel larger than padded input");
  if ((height + 2 * padding - kernel_h) % stride != 0 ||
      (width + 2 * padding - kernel_w) % stride != 0)
    fail("output extent is not an integer");
}

namespace kernels {

namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 15;
constexpr std::size_t kColumnBlock = 256;

}  // namespace

template <typename T>
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate) {
  const bool ta = trans_a == Trans::yes;
  const bool tb = trans_b == Trans::yes;
  const auto a_at = [=](std::size_t i, std::size_t p) { return ta ? a[p * m + i] : a[i * k + p]; };
  const bool parallel = m * n * k >= kParallelWork && m > 1;

  // Each c[i,j] accumulates its k terms in increasing order, exactly like
  // reference::gemm; only the traversal around that chain differs.
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    if (!tb) {
      for (std::size_t j0 = 0; j0 < n; j0 += kColumnBlock) {
        const std::size_t j1 = std::min(n, j0 + kColumnBlock);
        for (std::size_t p = 0; p < k; ++p) {
          const T aip = a_at(i, p);
          const T* brow = b + p * n;
          for (std::size_t j = j0; j < j1; ++j) crow[j] += aip * brow[j];
        }
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        const T* bcol = b + j * k;
        T acc = crow[j];
        if (!ta) {
          const T* arow = a + i * k;
          for (std::size_t p = 0; p < k; ++p) acc += arow[p] * bcol[p];
        } else {
          for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * bcol[p];
        }
        crow[j] = acc;
      }
    }
  }
}

template <typename T>
void im2col(const T* image, const ConvGeometry& geo, T* cols) {
  const std::size_t oh = geo.out_height(), ow = geo.out_width();
  const std::size_t plane = oh * ow;
  for (std::size_t c = 0; c < geo.channels; ++c)
    for (std::size_t ki = 0; ki < geo.kernel_h; ++ki)
      for (std::size_t kj = 0; kj < geo.kernel_w; ++kj) {
        T* row = cols + ((c * geo.kernel_h + ki) * geo.kernel_w + kj) * plane;
        const T* src = image + c * geo.height * geo.width;
        for (std::size_t y = 0; y < oh; ++y) {
          // Signed arithmetic: padded taps fall at negative coordinates.
          const auto iy = static_cast<std::ptrdiff_t>(y * geo.stride + ki) -
                          static_cast<std::ptrdiff_t>(geo.padding);
          T* dst = row + y * ow;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(geo.height)) {
            std::fill(dst, dst + ow, T(0));
            continue;
          }
          const T* line = src + static_cast<std::size_t>(iy) * geo.width;
          for (std::size_t x = 0; x < ow; ++x) {
            const auto ix = static_cast<std::ptrdiff_t>(x * geo.stride + kj) -
                            static_cast<std::ptrdiff_t>(geo.padding);
            dst[x] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(geo.width))
                         ? T(0)
                         : line[static_cast<std::size_t>(ix)];
          }
        }
      }
}

template <typename T>
void col2im(const T* cols, const ConvGeometry& geo, T* image) {
  const std::size_t oh = geo.out_height(), ow = geo.out_width();
  const std::size_t plane = oh * ow;
  for (std::size_t c = 0; c < geo.channels; ++c)
    for (std::size_t ki = 0; ki < geo.kernel_h; ++ki)
      for (std::size_t kj = 0; kj < geo.kernel_w; ++kj) {
        const T* row = cols + ((c * geo.kernel_h + ki) * geo.kernel_w + kj) * plane;
        T* dst = image + c * geo.height * geo.width;
        for (std::size_t y = 0; y < oh; ++y) {
          const auto iy = static_cast<std::ptrdiff_t>(y * geo.stride + ki) -
                          static_cast<std::ptrdiff_t>(geo.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(geo.height)) continue;
          T* line = dst + static_cast<std::size_t>(iy) * geo.width;
          for (std::size_t x = 0; x < ow; ++x) {
            const auto ix = static_cast<std::ptrdiff_t>(x * geo.stride + kj) -
                            static_cast<std::ptrdiff_t>(geo.padding);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(geo.width))
              line[static_cast<std::size_t>(ix)] += row[y * ow + x];
          }
        }
      }
}

namespace {

template <typename T>
ConvGeometry conv_geometry(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                           std::size_t stride, std::size_t padding) {
  if (input.rank() != 4 || weight.rank() != 4 || input.dim(1) != weight.dim(1))
    throw ShapeError("conv2d: input " + shape_string(input.shape()) +
                     " incompatible with weights " + shape_string(weight.shape()));
  ConvGeometry geo{input.dim(1), input.dim(2), input.dim(3), weight.dim(2), weight.dim(3),
                   stride,       padding};
  geo.validate();
  return geo;
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                              const BasicTensor<T>& bias, std::size_t stride,
                              std::size_t padding) {
  const ConvGeometry geo = conv_geometry(input, weight, stride, padding);
  const std::size_t batch = input.dim(0), out_ch = weight.dim(0);
  if (bias.size() != out_ch)
    throw ShapeError("conv2d: bias " + shape_string(bias.shape()) + " for " +
                     std::to_string(out_ch) + " output channels");
  const std::size_t plane = geo.out_height() * geo.out_width();
  const std::size_t in_stride = geo.channels * geo.height * geo.width;
  BasicTensor<T> out({batch, out_ch, geo.out_height(), geo.out_width()});

  // Batch items run in parallel; the gemm inside each is then serial.
#pragma omp parallel if (batch > 1)
  {
    std::vector<T> cols(geo.patch_size() * plane);
#pragma omp for schedule(static)
    for (std::size_t b = 0; b < batch; ++b) {
      im2col(input.data() + b * in_stride, geo, cols.data());
      T* dst = out.data() + b * out_ch * plane;
      gemm(Trans::no, Trans::no, out_ch, plane, geo.patch_size(), weight.data(), cols.data(), dst);
      for (std::size_t o = 0; o < out_ch; ++o)
        for (std::size_t p = 0; p < plane; ++p) dst[o * plane + p] += bias[o];
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                             const BasicTensor<T>& grad_out, std::size_t stride,
                             std::size_t padding) {
  const ConvGeometry geo = conv_geometry(input, weight, stride, padding);
  const std::size_t batch = input.dim(0), out_ch = weight.dim(0);
  const Shape expected{batch, out_ch, geo.out_height(), geo.out_width()};
  if (grad_out.shape() != expected)
    throw ShapeError("conv2d backward: gradient " + shape_string(grad_out.shape()) +
                     ", expected " + shape_string(expected));
  const std::size_t plane = geo.out_height() * geo.out_width();
  const std::size_t patch = geo.patch_size();
  const std::size_t in_stride = geo.channels * geo.height * geo.width;

  ConvGrads<T> g{BasicTensor<T>(input.shape()), BasicTensor<T>(weight.shape()),
                 BasicTensor<T>({out_ch})};
  std::vector<T> cols(patch * plane);
  std::vector<T> grad_cols(patch * plane);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* gout = grad_out.data() + b * out_ch * plane;
    im2col(input.data() + b * in_stride, geo, cols.data());
    gemm(Trans::no, Trans::yes, out_ch, patch, plane, gout, cols.data(), g.weight.data(), true);
    for (std::size_t o = 0; o < out_ch; ++o)
      for (std::size_t p = 0; p < plane; ++p) g.bias[o] += gout[o * plane + p];
    gemm(Trans::yes, Trans::no, patch, plane, out_ch, weight.data(), gout, grad_cols.data());
    col2im(grad_cols.data(), geo, g.input.data() + b * in_stride);
  }
  return g;
}

template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& input, std::vector<std::uint32_t>& argmax) {
  if (input.rank() != 4)
    throw ShapeError("maxpool2x2: expected B×C×H×W, got " + shape_string(input.shape()));
  const std::size_t h = input.dim(2), w = input.dim(3);
  if (h % 2 != 0 || w % 2 != 0)
    throw ShapeError("maxpool2x2: odd spatial extent in " + shape_string(input.shape()));
  if (input.size() > std::numeric_limits<std::uint32_t>::max())
    throw ShapeError("maxpool2x2: input too large for 32-bit indices");
  const std::size_t planes = input.dim(0) * input.dim(1);
  const std::size_t oh = h / 2, ow = w / 2;
  BasicTensor<T> out({input.dim(0), input.dim(1), oh, ow});
  argmax.assign(out.size(), 0);

#pragma omp parallel for schedule(static) if (planes > 1 && input.size() >= kParallelWork)
  for (std::size_t pl = 0; pl < planes; ++pl) {
    const T* src = input.data() + pl * h * w;
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t taps[4] = {2 * y * w + 2 * x, 2 * y * w + 2 * x + 1,
                                     (2 * y + 1) * w + 2 * x, (2 * y + 1) * w + 2 * x + 1};
        std::size_t best = taps[0];
        for (int t = 1; t < 4; ++t)
          if (src[taps[t]] > src[best]) best = taps[t];
        const std::size_t o = pl * oh * ow + y * ow + x;
        out[o] = src[best];
        argmax[o] = static_cast<std::uint32_t>(pl * h * w + best);
      }
  }
  return out;
}

#define WOODNET_INSTANTIATE_KERNELS(T)                                                          \
  template void gemm(Trans, Trans, std::size_t, std::size_t, std::size_t, const T*, const T*,   \
                     T*, bool);                                                                 \
  template void im2col(const T*, const ConvGeometry&, T*);                                      \
  template void col2im(const T*, const ConvGeometry&, T*);                                      \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&,          \
                                         const BasicTensor<T>&, std::size_t, std::size_t);      \
  template ConvGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&,           \
                                        const BasicTensor<T>&, std::size_t, std::size_t);       \
  template BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>&, std::vector<std::uint32_t>&);

WOODNET_INSTANTIATE_KERNELS(float)
WOODNET_INSTANTIATE_KERNELS(double)

}  // namespace kernels
}  // namespace woodnet
