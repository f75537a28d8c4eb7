#include "drd/metrics/losses.hpp"

#include <string>

#include "drd/core/error.hpp"
#include "drd/tensor/ops.hpp"

namespace drd::metrics {

void LossConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("loss weights must be >= 0");
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shapes " + a.shape().str() + " and " + b.shape().str() + " differ");
  }
}

Tensor batch_mean(const Tensor& sse, std::int64_t n) {
  const Tensor terms[] = {sse};
  const double weights[] = {1.0 / static_cast<double>(n)};
  return ops::linear_combination(terms, weights);
}

}  // namespace

Tensor loss_rain(const Tensor& r_pred, const Tensor& r_gt) {
  require_same(r_pred, r_gt, "loss_rain");
  return batch_mean(ops::squared_error_sum(r_pred, r_gt), r_pred.shape().n);
}

Tensor loss_detail(const Tensor& i_p, const Tensor& i_r, const Tensor& i_gt) {
  require_same(i_p, i_gt, "loss_detail");
  require_same(i_r, i_gt, "loss_detail");
  return batch_mean(ops::squared_error_sum(ops::add(i_p, i_r), i_gt), i_gt.shape().n);
}

Tensor loss_total(const Tensor& rain, const Tensor& detail, const LossConfig& cfg) {
  const Tensor terms[] = {rain, detail};
  const double weights[] = {cfg.lambda1, cfg.lambda2};
  return ops::linear_combination(terms, weights);
}

}  // namespace drd::metrics
