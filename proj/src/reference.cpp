#include "woodnet/reference.hpp"

namespace woodnet::reference {

template <typename T>
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = accumulate ? c[i * n + j] : T(0);
      for (std::size_t p = 0; p < k; ++p) {
        const T av = trans_a == Trans::yes ? a[p * m + i] : a[i * k + p];
        const T bv = trans_b == Trans::yes ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      c[i * n + j] = acc;
    }
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw ShapeError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                     shape_string(b.shape()));
  BasicTensor<T> c({a.dim(0), b.dim(1)});
  gemm(Trans::no, Trans::no, a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(), c.data());
  return c;
}

namespace {

template <typename T>
ConvGeometry geometry(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      std::size_t stride, std::size_t padding) {
  if (input.rank() != 4 || weight.rank() != 4 || input.dim(1) != weight.dim(1))
    throw ShapeError("conv2d: input " + shape_string(input.shape()) +
                     " incompatible with weights " + shape_string(weight.shape()));
  ConvGeometry geo{input.dim(1), input.dim(2), input.dim(3), weight.dim(2), weight.dim(3),
                   stride,       padding};
  geo.validate();
  return geo;
}

// Input coordinate of output position `o`, tap `k`; false when it lands in padding.
bool source_index(std::size_t o, std::size_t k, const ConvGeometry& geo, std::size_t extent,
                  std::size_t& out) {
  const auto s = static_cast<std::ptrdiff_t>(o * geo.stride + k) -
                 static_cast<std::ptrdiff_t>(geo.padding);
  if (s < 0 || s >= static_cast<std::ptrdiff_t>(extent)) return false;
  out = static_cast<std::size_t>(s);
  return true;
}

// Output coordinate that reads input position `i` through tap `k`, if any.
bool target_index(std::size_t i, std::size_t k, const ConvGeometry& geo, std::size_t out_extent,
                  std::size_t& out) {
  const auto s = static_cast<std::ptrdiff_t>(i + geo.padding) - static_cast<std::ptrdiff_t>(k);
  if (s < 0 || s % static_cast<std::ptrdiff_t>(geo.stride) != 0) return false;
  out = static_cast<std::size_t>(s) / geo.stride;
  return out < out_extent;
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                              const BasicTensor<T>& bias, std::size_t stride,
                              std::size_t padding) {
  const ConvGeometry geo = geometry(input, weight, stride, padding);
  const std::size_t batch = input.dim(0), out_ch = weight.dim(0);
  if (bias.size() != out_ch) throw ShapeError("conv2d: bias/out-channel mismatch");
  BasicTensor<T> out({batch, out_ch, geo.out_height(), geo.out_width()});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_ch; ++o)
      for (std::size_t y = 0; y < geo.out_height(); ++y)
        for (std::size_t x = 0; x < geo.out_width(); ++x) {
          T acc = 0;
          for (std::size_t c = 0; c < geo.channels; ++c)
            for (std::size_t ki = 0; ki < geo.kernel_h; ++ki)
              for (std::size_t kj = 0; kj < geo.kernel_w; ++kj) {
                std::size_t iy, ix;
                if (!source_index(y, ki, geo, geo.height, iy) ||
                    !source_index(x, kj, geo, geo.width, ix))
                  continue;
                acc += input.at({b, c, iy, ix}) * weight.at({o, c, ki, kj});
              }
          out.at({b, o, y, x}) = acc + bias[o];
        }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                             const BasicTensor<T>& grad_out, std::size_t stride,
                             std::size_t padding) {
  const ConvGeometry geo = geometry(input, weight, stride, padding);
  const std::size_t batch = input.dim(0), out_ch = weight.dim(0);
  ConvGrads<T> g{BasicTensor<T>(input.shape()), BasicTensor<T>(weight.shape()),
                 BasicTensor<T>({out_ch})};
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_ch; ++o)
      for (std::size_t y = 0; y < geo.out_height(); ++y)
        for (std::size_t x = 0; x < geo.out_width(); ++x) {
          const T go = grad_out.at({b, o, y, x});
          g.bias[o] += go;
          for (std::size_t c = 0; c < geo.channels; ++c)
            for (std::size_t ki = 0; ki < geo.kernel_h; ++ki)
              for (std::size_t kj = 0; kj < geo.kernel_w; ++kj) {
                std::size_t iy, ix;
                if (!source_index(y, ki, geo, geo.height, iy) ||
                    !source_index(x, kj, geo, geo.width, ix))
                  continue;
                g.weight.at({o, c, ki, kj}) += go * input.at({b, c, iy, ix});
              }
        }
  // Input gradient as a gather: every tap that reads an input pixel
  // contributes the sum over output channels of weight × output gradient.
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < geo.channels; ++c)
      for (std::size_t iy = 0; iy < geo.height; ++iy)
        for (std::size_t ix = 0; ix < geo.width; ++ix) {
          T acc = 0;
          for (std::size_t ki = 0; ki < geo.kernel_h; ++ki)
            for (std::size_t kj = 0; kj < geo.kernel_w; ++kj) {
              std::size_t y, x;
              if (!target_index(iy, ki, geo, geo.out_height(), y) ||
                  !target_index(ix, kj, geo, geo.out_width(), x))
                continue;
              T tap = 0;
              for (std::size_t o = 0; o < out_ch; ++o)
                tap += weight.at({o, c, ki, kj}) * grad_out.at({b, o, y, x});
              acc += tap;
            }
          g.input.at({b, c, iy, ix}) = acc;
        }
  return g;
}

template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& input, std::vector<std::uint32_t>& argmax) {
  if (input.rank() != 4 || input.dim(2) % 2 != 0 || input.dim(3) % 2 != 0)
    throw ShapeError("maxpool2x2: bad input " + shape_string(input.shape()));
  const std::size_t h = input.dim(2), w = input.dim(3);
  BasicTensor<T> out({input.dim(0), input.dim(1), h / 2, w / 2});
  argmax.assign(out.size(), 0);
  std::size_t o = 0;
  for (std::size_t b = 0; b < input.dim(0); ++b)
    for (std::size_t c = 0; c < input.dim(1); ++c)
      for (std::size_t y = 0; y < h / 2; ++y)
        for (std::size_t x = 0; x < w / 2; ++x, ++o) {
          std::size_t by = 2 * y, bx = 2 * x;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx)
              if (input.at({b, c, 2 * y + dy, 2 * x + dx}) > input.at({b, c, by, bx})) {
                by = 2 * y + dy;
                bx = 2 * x + dx;
              }
          out[o] = input.at({b, c, by, bx});
          argmax[o] = static_cast<std::uint32_t>(((b * input.dim(1) + c) * h + by) * w + bx);
        }
  return out;
}

#define WOODNET_INSTANTIATE_REFERENCE(T)                                                       \
  template void gemm(Trans, Trans, std::size_t, std::size_t, std::size_t, const T*, const T*,  \
                     T*, bool);                                                                \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&,         \
                                         const BasicTensor<T>&, std::size_t, std::size_t);     \
  template ConvGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&,          \
                                        const BasicTensor<T>&, std::size_t, std::size_t);      \
  template BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>&, std::vector<std::uint32_t>&);

WOODNET_INSTANTIATE_REFERENCE(float)
WOODNET_INSTANTIATE_REFERENCE(double)

}  // namespace woodnet::reference
