#pragma once

#include <cstddef>
#include <vector>

#include "aublend/ad/tensor.hpp"

namespace aublend::ad {

// Elementwise binary ops. The right operand may be the same shape, a row
// vector (1 x cols, or 1-D of length cols), a column vector (rows x 1) or
// a single element; it is broadcast against the left operand.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // hadamard

Tensor scale(const Tensor& a, double factor);
Tensor square(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor gelu(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
// (1 x m) -> (n x m)
Tensor tile_rows(const Tensor& row, std::size_t n);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Row-wise normalisation over the last dimension, then x_hat * gain + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor layer_norm(const Tensor& x, double eps = 1e-5);

// Softmax over the last dimension.
Tensor softmax(const Tensor& x);

// Causal dilated convolution over time. x: T x Cin; weight: (K*Cin) x Cout
// where row k*Cin + c multiplies x[t - (K-1-k)*dilation][c]; bias: 1 x Cout.
Tensor dilated_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t kernel,
                      std::size_t dilation);

// Forward: identity. Backward: zero into x.
Tensor stop_gradient(const Tensor& x);

// Forward: the values of `quantized`. Backward: the incoming gradient is
// copied unchanged into `z`; nothing flows into `quantized`.
Tensor straight_through(const Tensor& z, const Tensor& quantized);

// Rows of `table` selected by `indices`; backward scatter-adds.
Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& indices);

// x W + b
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct MhsaParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
};

// Unmasked multi-head self-attention over the rows (tokens) of x.
Tensor mhsa(const Tensor& x, const MhsaParams& params, std::size_t heads);

}  // namespace aublend::ad
