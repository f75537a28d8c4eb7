#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drd/nn/module.hpp"

namespace drd::training {

struct OptimizerState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  /// Moments in parameter order, each the size of its parameter.
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  bool operator==(const OptimizerState&) const = default;
};

/// Zero moments shaped like `params`.
OptimizerState make_optimizer_state(std::span<const nn::NamedTensor> params);

/// One bias-corrected Adam update with learning rate `lr`. Math is in double,
/// moments are stored as float. UsageError names a parameter without a
/// gradient or whose size disagrees with its moments.
void adam_step(std::span<const nn::NamedTensor> params, OptimizerState& state, double lr);

}  // namespace drd::training
