#include "woodnet/ops.hpp"

#include <cmath>

#include "woodnet/kernels.hpp"

namespace woodnet {

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw ShapeError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                     shape_string(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  BasicTensor<T> c({m, n});
  kernels::gemm(Trans::no, Trans::no, m, n, k, a.data(), b.data(), c.data());
  return c;
}

template <typename T>
BasicTensor<T> elementwise(BinaryOp op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("elementwise: shape " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  BasicTensor<T> out(a.shape());
  const std::size_t n = a.size();
  switch (op) {
    case BinaryOp::add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      break;
    case BinaryOp::sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      break;
    case BinaryOp::mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      break;
  }
  return out;
}

template <typename T>
BasicTensor<T> elementwise(UnaryOp op, const BasicTensor<T>& a) {
  BasicTensor<T> out(a.shape());
  const std::size_t n = a.size();
  switch (op) {
    case UnaryOp::max_with_zero:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > T(0) ? a[i] : T(0);
      break;
    case UnaryOp::ln:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(a[i] > T(0)))
          throw DomainError("ln of non-positive element at index " + std::to_string(i));
        out[i] = std::log(a[i]);
      }
      break;
    case UnaryOp::exp:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
      break;
  }
  return out;
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  return out;
}

namespace {

struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
  Shape reduced;
};

template <typename T>
AxisSplit split_axis(const BasicTensor<T>& t, std::size_t axis) {
  if (axis >= t.rank())
    throw ShapeError("reduce: axis " + std::to_string(axis) + " out of range for " +
                     shape_string(t.shape()));
  AxisSplit s;
  for (std::size_t d = 0; d < t.rank(); ++d) {
    if (d < axis) s.outer *= t.dim(d);
    if (d > axis) s.inner *= t.dim(d);
    if (d != axis) s.reduced.push_back(t.dim(d));
  }
  s.extent = t.dim(axis);
  return s;
}

}  // namespace

template <typename T>
BasicTensor<T> reduce(ReduceOp op, const BasicTensor<T>& t, std::size_t axis) {
  const AxisSplit s = split_axis(t, axis);
  BasicTensor<T> out(s.reduced);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t i = 0; i < s.inner; ++i) {
      T acc = 0;
      for (std::size_t e = 0; e < s.extent; ++e) acc += t[(o * s.extent + e) * s.inner + i];
      if (op == ReduceOp::mean) acc /= static_cast<T>(s.extent);
      out[o * s.inner + i] = acc;
    }
  return out;
}

template <typename T>
std::size_t argmax(std::span<const T> values) {
  if (values.empty()) throw ShapeError("argmax of an empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

template <typename T>
std::vector<std::size_t> argmax(const BasicTensor<T>& t, std::size_t axis) {
  const AxisSplit s = split_axis(t, axis);
  std::vector<std::size_t> out(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o)
    for (std::size_t i = 0; i < s.inner; ++i) {
      std::size_t best = 0;
      for (std::size_t e = 1; e < s.extent; ++e)
        if (t[(o * s.extent + e) * s.inner + i] > t[(o * s.extent + best) * s.inner + i]) best = e;
      out[o * s.inner + i] = best;
    }
  return out;
}

#define WOODNET_INSTANTIATE_OPS(T)                                                          \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);             \
  template BasicTensor<T> elementwise(BinaryOp, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> elementwise(UnaryOp, const BasicTensor<T>&);                      \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                  \
  template BasicTensor<T> reduce(ReduceOp, const BasicTensor<T>&, std::size_t);             \
  template std::size_t argmax(std::span<const T>);                                          \
  template std::vector<std::size_t> argmax(const BasicTensor<T>&, std::size_t);

WOODNET_INSTANTIATE_OPS(float)
WOODNET_INSTANTIATE_OPS(double)

}  // namespace woodnet
