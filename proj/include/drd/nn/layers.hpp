#pragma once

#include "drd/nn/module.hpp"
#include "drd/tensor/ops.hpp"

namespace drd::nn {

/// Square k x k convolution with bias, stride 1 and "same" zero padding
/// d * (k - 1) / 2.
class Conv2d : public Module {
 public:
  Conv2d(std::int64_t in_channels, std::int64_t out_channels, int kernel, int dilation = 1);

  Tensor forward(const Tensor& x) const;

  std::int64_t in_channels() const { return weight.shape().c; }
  std::int64_t out_channels() const { return weight.shape().n; }
  int kernel() const { return kernel_; }
  int dilation() const { return dilation_; }
  int padding() const { return dilation_ * (kernel_ - 1) / 2; }

  /// Sets weight and bias to exactly zero.
  void zero();

  Tensor weight;
  Tensor bias;

 protected:
  void visit_own(const std::string& prefix, const Visitor& fn) override;
  // He-normal for a PReLU slope of 0.25, zero bias.
  void reset_own(Rng& rng) override;

 private:
  int kernel_;
  int dilation_;
};

class BatchNorm2d : public Module {
 public:
  explicit BatchNorm2d(std::int64_t channels, double eps = 1e-5, double momentum = 0.1);

  /// Batch statistics in training mode, running statistics otherwise.
  Tensor forward(const Tensor& x);

  Tensor gamma;
  Tensor beta;
  ops::RunningStats running;

 protected:
  void visit_own(const std::string& prefix, const Visitor& fn) override;
  void reset_own(Rng& rng) override;

 private:
  double eps_;
  double momentum_;
};

/// Per-channel PReLU, slopes initialized to 0.25.
class PReLU : public Module {
 public:
  explicit PReLU(std::int64_t channels);

  Tensor forward(const Tensor& x) const { return ops::prelu(x, alpha); }

  Tensor alpha;

 protected:
  void visit_own(const std::string& prefix, const Visitor& fn) override;
  void reset_own(Rng& rng) override;
};

/// Affine map on (N, C, 1, 1) features.
class Linear : public Module {
 public:
  Linear(std::int64_t in_features, std::int64_t out_features);

  Tensor forward(const Tensor& x) const { return ops::fully_connected(x, weight, bias); }

  Tensor weight;  // (out, in, 1, 1)
  Tensor bias;    // (1, out, 1, 1)

 protected:
  void visit_own(const std::string& prefix, const Visitor& fn) override;
  void reset_own(Rng& rng) override;
};

struct SEResult {
  Tensor output;  // input scaled per channel
  Tensor gate;    // (N, C, 1, 1), strictly inside (0, 1)
};

/// Squeeze-and-excitation: g = sigmoid(fc2(relu(fc1(gap(x))))), output x * g.
class SEUnit : public Module {
 public:
  SEUnit(std::int64_t channels, std::int64_t reduction);

  SEResult forward(const Tensor& x) const;

  std::int64_t channels() const { return channels_; }
  std::int64_t reduction() const { return reduction_; }

  Linear fc1;
  Linear fc2;

 protected:
  std::vector<std::pair<std::string, Module*>> children() override { return {{"fc1", &fc1}, {"fc2", &fc2}}; }

 private:
  std::int64_t channels_;
  std::int64_t reduction_;
};

}  // namespace drd::nn
