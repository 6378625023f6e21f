#pragma once

// Serial, loop-for-loop reference implementations. Slow on purpose: they are
// the oracles the optimized kernels are checked against.

#include <cstdint>
#include <vector>

#include "woodnet/kernels.hpp"

namespace woodnet::reference {

template <typename T>
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          const T* b, T* c, bool accumulate = false);

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                              const BasicTensor<T>& bias, std::size_t stride,
                              std::size_t padding);

template <typename T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                             const BasicTensor<T>& grad_out, std::size_t stride,
                             std::size_t padding);

template <typename T>
BasicTensor<T> maxpool2x2_forward(const BasicTensor<T>& input, std::vector<std::uint32_t>& argmax);

}  // namespace woodnet::reference
