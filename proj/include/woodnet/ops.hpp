#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "woodnet/tensor.hpp"

namespace woodnet {

enum class BinaryOp { add, sub, mul };
enum class UnaryOp { max_with_zero, ln, exp };
enum class ReduceOp { sum, mean };

// c[i,j] = sum_k a[i,k] * b[k,j]; both operands rank 2.
template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> elementwise(BinaryOp op, const BasicTensor<T>& a, const BasicTensor<T>& b);

// ln throws DomainError on any element <= 0.
template <typename T>
BasicTensor<T> elementwise(UnaryOp op, const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor);

// Reduces along `axis`, dropping it from the shape.
template <typename T>
BasicTensor<T> reduce(ReduceOp op, const BasicTensor<T>& t, std::size_t axis);

// Index of the largest element; ties go to the lowest index.
template <typename T>
std::size_t argmax(std::span<const T> values);

// argmax along `axis`, one index per remaining position (row-major).
template <typename T>
std::vector<std::size_t> argmax(const BasicTensor<T>& t, std::size_t axis);

}  // namespace woodnet
