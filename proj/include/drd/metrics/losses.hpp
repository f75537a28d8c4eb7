#pragma once

#include "drd/tensor/tensor.hpp"

namespace drd::metrics {

struct LossConfig {
  double lambda1 = 0.1;  // rain term
  double lambda2 = 1.0;  // detail term

  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

/// (1/N) * sum over the batch of ||r_pred - r_gt||^2: mean over samples,
/// sum over pixels and channels.
Tensor loss_rain(const Tensor& r_pred, const Tensor& r_gt);

/// Same reduction applied to (i_p + i_r) - i_gt.
Tensor loss_detail(const Tensor& i_p, const Tensor& i_r, const Tensor& i_gt);

/// lambda1 * rain + lambda2 * detail, combined in double.
Tensor loss_total(const Tensor& rain, const Tensor& detail, const LossConfig& cfg);

}  // namespace drd::metrics
