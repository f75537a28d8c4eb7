#pragma once

#include <span>
#include <vector>

#include "drd/tensor/tensor.hpp"

/// Differentiable tensor operations. Every function records a backward node
/// when grad mode is on and an input requires a gradient.
namespace drd::ops {

struct Conv2dOptions {
  int stride = 1;
  int dilation = 1;
  int padding = 0;
};

/// Output extent of a convolution along one axis.
std::int64_t conv_output_size(std::int64_t in, int kernel, int stride, int dilation, int padding);

/// Zero-padded 2-D cross-correlation. weight is (C_out, C_in, k, k); bias is
/// (1, C_out, 1, 1) or undefined.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, Conv2dOptions opt);

/// Running statistics owned by a batch-norm layer, each (1, C, 1, 1).
struct RunningStats {
  Tensor mean;
  Tensor var;
};

/// Per-channel batch normalization. Training mode normalizes with the batch
/// statistics (biased variance) and updates `running` with unbiased
/// variance; eval mode uses `running`.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, RunningStats& running,
                  bool training, double eps = 1e-5, double momentum = 0.1);

/// Per-channel PReLU; alpha is (1, C, 1, 1).
Tensor prelu(const Tensor& input, const Tensor& alpha);
Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);

/// Spatial mean per (n, c); output (N, C, 1, 1).
Tensor global_avg_pool(const Tensor& input);

/// Affine map on (N, C_in, 1, 1) with weight (C_out, C_in, 1, 1) and bias
/// (1, C_out, 1, 1) or undefined.
Tensor fully_connected(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// Broadcasting elementwise ops: each axis must match or be 1 on one side.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& input, float factor);

Tensor concat_channels(std::span<const Tensor> inputs);
Tensor slice_channels(const Tensor& input, std::int64_t begin, std::int64_t count);

/// Scalar sum, accumulated in double.
Tensor sum(const Tensor& input);
/// Scalar sum of squared differences, accumulated in double.
Tensor squared_error_sum(const Tensor& a, const Tensor& b);
/// Scalar sum_i weights[i] * terms[i] over scalar terms, evaluated in double
/// and rounded once.
Tensor linear_combination(std::span<const Tensor> terms, std::span<const double> weights);

}  // namespace drd::ops
