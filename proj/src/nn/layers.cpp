#include "drd/nn/layers.hpp"

#include <cmath>
#include <string>

#include "drd/core/error.hpp"

namespace drd::nn {

namespace {

constexpr float kPreluInit = 0.25f;

void fill_normal(Tensor& t, Rng& rng, double stddev) {
  for (float& v : t.data()) v = static_cast<float>(rng.normal() * stddev);
}

void fill(Tensor& t, float value) {
  for (float& v : t.data()) v = value;
}

void require_positive(std::int64_t v, const char* what) {
  if (v < 1) throw ConfigError(std::string(what) + " must be >= 1, got " + std::to_string(v));
}

}  // namespace

Conv2d::Conv2d(std::int64_t in_channels, std::int64_t out_channels, int kernel, int dilation)
    : kernel_(kernel), dilation_(dilation) {
  require_positive(in_channels, "conv input channels");
  require_positive(out_channels, "conv output channels");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("conv kernel must be odd and positive, got " + std::to_string(kernel));
  require_positive(dilation, "conv dilation");
  weight = Tensor::zeros({out_channels, in_channels, kernel, kernel}, true);
  bias = Tensor::zeros({1, out_channels, 1, 1}, true);
}

Tensor Conv2d::forward(const Tensor& x) const { return ops::conv2d(x, weight, bias, {1, dilation_, padding()}); }

void Conv2d::zero() {
  fill(weight, 0.0f);
  fill(bias, 0.0f);
}

void Conv2d::visit_own(const std::string& prefix, const Visitor& fn) {
  fn(join_name(prefix, "weight"), weight, StateKind::parameter);
  fn(join_name(prefix, "bias"), bias, StateKind::parameter);
}

void Conv2d::reset_own(Rng& rng) {
  const double fan_in = static_cast<double>(in_channels()) * kernel_ * kernel_;
  const double a = kPreluInit;
  fill_normal(weight, rng, std::sqrt(2.0 / ((1.0 + a * a) * fan_in)));
  fill(bias, 0.0f);
}

BatchNorm2d::BatchNorm2d(std::int64_t channels, double eps, double momentum) : eps_(eps), momentum_(momentum) {
  require_positive(channels, "batch-norm channels");
  if (!(eps > 0.0)) throw ConfigError("batch-norm eps must be > 0");
  gamma = Tensor::full({1, channels, 1, 1}, 1.0f, true);
  beta = Tensor::zeros({1, channels, 1, 1}, true);
  running = {Tensor::zeros({1, channels, 1, 1}), Tensor::full({1, channels, 1, 1}, 1.0f)};
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  return ops::batch_norm(x, gamma, beta, running, training_, eps_, momentum_);
}

void BatchNorm2d::visit_own(const std::string& prefix, const Visitor& fn) {
  fn(join_name(prefix, "gamma"), gamma, StateKind::parameter);
  fn(join_name(prefix, "beta"), beta, StateKind::parameter);
  fn(join_name(prefix, "running_mean"), running.mean, StateKind::buffer);
  fn(join_name(prefix, "running_var"), running.var, StateKind::buffer);
}

void BatchNorm2d::reset_own(Rng&) {
  fill(gamma, 1.0f);
  fill(beta, 0.0f);
  fill(running.mean, 0.0f);
  fill(running.var, 1.0f);
}

PReLU::PReLU(std::int64_t channels) {
  require_positive(channels, "prelu channels");
  alpha = Tensor::full({1, channels, 1, 1}, kPreluInit, true);
}

void PReLU::visit_own(const std::string& prefix, const Visitor& fn) {
  fn(join_name(prefix, "alpha"), alpha, StateKind::parameter);
}

void PReLU::reset_own(Rng&) { fill(alpha, kPreluInit); }

Linear::Linear(std::int64_t in_features, std::int64_t out_features) {
  require_positive(in_features, "linear input features");
  require_positive(out_features, "linear output features");
  weight = Tensor::zeros({out_features, in_features, 1, 1}, true);
  bias = Tensor::zeros({1, out_features, 1, 1}, true);
}

void Linear::visit_own(const std::string& prefix, const Visitor& fn) {
  fn(join_name(prefix, "weight"), weight, StateKind::parameter);
  fn(join_name(prefix, "bias"), bias, StateKind::parameter);
}

void Linear::reset_own(Rng& rng) {
  fill_normal(weight, rng, std::sqrt(1.0 / static_cast<double>(weight.shape().c)));
  fill(bias, 0.0f);
}

namespace {

std::int64_t checked_bottleneck(std::int64_t channels, std::int64_t reduction) {
  if (reduction < 1) throw ConfigError("SE reduction must be >= 1, got " + std::to_string(reduction));
  if (channels < reduction || channels % reduction != 0) {
    throw ConfigError("SE channels " + std::to_string(channels) + " not divisible by reduction " +
                      std::to_string(reduction));
  }
  return channels / reduction;
}

}  // namespace

SEUnit::SEUnit(std::int64_t channels, std::int64_t reduction)
    : fc1(channels, checked_bottleneck(channels, reduction)),
      fc2(channels / reduction, channels),
      channels_(channels),
      reduction_(reduction) {}

SEResult SEUnit::forward(const Tensor& x) const {
  if (x.shape().c != channels_) {
    throw DimensionError("SE unit expects " + std::to_string(channels_) + " channels (axis 1), got " +
                         std::to_string(x.shape().c));
  }
  Tensor squeezed = ops::global_avg_pool(x);
  Tensor gate = ops::sigmoid(fc2.forward(ops::relu(fc1.forward(squeezed))));
  return {ops::mul(x, gate), gate};
}

}  // namespace drd::nn
