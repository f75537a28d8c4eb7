#include <cmath>
#include <string>
#include <vector>

#include "drd/core/error.hpp"
#include "drd/tensor/ops.hpp"

namespace drd::ops {

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, RunningStats& running,
                  bool training, double eps, double momentum) {
  if (!(eps > 0.0)) throw ConfigError("batch_norm: eps must be positive, got " + std::to_string(eps));
  if (momentum < 0.0 || momentum > 1.0) throw ConfigError("batch_norm: momentum must lie in [0, 1]");
  const Shape& s = input.shape();
  const Shape channel{1, s.c, 1, 1};
  if (gamma.shape() != channel || beta.shape() != channel) {
    throw DimensionError("batch_norm: gamma/beta must be " + channel.str() + " for channels (axis 1) = " +
                         std::to_string(s.c));
  }
  if (running.mean.shape() != channel || running.var.shape() != channel) {
    throw DimensionError("batch_norm: running statistics must be " + channel.str());
  }
  const std::int64_t plane = s.plane();
  const std::int64_t count = s.n * plane;
  if (training && count < 1) throw DimensionError("batch_norm: empty batch");

  std::vector<double> mean(static_cast<std::size_t>(s.c));
  std::vector<double> inv_std(static_cast<std::size_t>(s.c));
  auto x = input.data();
  if (training) {
    auto rm = running.mean.data();
    auto rv = running.var.data();
    for (std::int64_t c = 0; c < s.c; ++c) {
      double sum = 0.0;
      for (std::int64_t n = 0; n < s.n; ++n) {
        const float* p = x.data() + (n * s.c + c) * plane;
        for (std::int64_t j = 0; j < plane; ++j) sum += p[j];
      }
      const double mu = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::int64_t n = 0; n < s.n; ++n) {
        const float* p = x.data() + (n * s.c + c) * plane;
        for (std::int64_t j = 0; j < plane; ++j) {
          const double d = p[j] - mu;
          sq += d * d;
        }
      }
      const double var = sq / static_cast<double>(count);
      mean[c] = mu;
      inv_std[c] = 1.0 / std::sqrt(var + eps);
      const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
      rm[c] = static_cast<float>((1.0 - momentum) * rm[c] + momentum * mu);
      rv[c] = static_cast<float>((1.0 - momentum) * rv[c] + momentum * unbiased);
    }
  } else {
    auto rm = running.mean.data();
    auto rv = running.var.data();
    for (std::int64_t c = 0; c < s.c; ++c) {
      mean[c] = rm[c];
      inv_std[c] = 1.0 / std::sqrt(static_cast<double>(rv[c]) + eps);
    }
  }

  Tensor out = Tensor::zeros(s);
  auto y = out.data();
  auto g = gamma.data();
  auto b = beta.data();
  for (std::int64_t n = 0; n < s.n; ++n)
    for (std::int64_t c = 0; c < s.c; ++c) {
      const std::size_t base = static_cast<std::size_t>((n * s.c + c) * plane);
      for (std::int64_t j = 0; j < plane; ++j) {
        const double xhat = (x[base + j] - mean[c]) * inv_std[c];
        y[base + j] = static_cast<float>(g[c] * xhat + b[c]);
      }
    }

  if (should_record({&input, &gamma, &beta})) {
    record(out, "batch_norm", {input, gamma, beta},
           [input, gamma, beta, mean, inv_std, training, s](const TensorImpl& o) mutable {
             const std::int64_t plane = s.plane();
             const double m = static_cast<double>(s.n * plane);
             auto x = input.data();
             auto g = gamma.data();
             const float* dy = o.grad.data();
             std::span<float> dx = input.requires_grad() ? input.grad_buffer() : std::span<float>{};
             std::vector<double> dgamma(static_cast<std::size_t>(s.c), 0.0);
             std::vector<double> dbeta(static_cast<std::size_t>(s.c), 0.0);
             for (std::int64_t c = 0; c < s.c; ++c) {
               double sum_dy = 0.0;
               double sum_dy_xhat = 0.0;
               for (std::int64_t n = 0; n < s.n; ++n) {
                 const std::size_t base = static_cast<std::size_t>((n * s.c + c) * plane);
                 for (std::int64_t j = 0; j < plane; ++j) {
                   const double xhat = (x[base + j] - mean[c]) * inv_std[c];
                   sum_dy += dy[base + j];
                   sum_dy_xhat += dy[base + j] * xhat;
                 }
               }
               dgamma[c] = sum_dy_xhat;
               dbeta[c] = sum_dy;
               if (dx.empty()) continue;
               const double gc = g[c];
               for (std::int64_t n = 0; n < s.n; ++n) {
                 const std::size_t base = static_cast<std::size_t>((n * s.c + c) * plane);
                 for (std::int64_t j = 0; j < plane; ++j) {
                   double grad;
                   if (training) {
                     const double xhat = (x[base + j] - mean[c]) * inv_std[c];
                     grad = gc * inv_std[c] * (dy[base + j] - sum_dy / m - xhat * sum_dy_xhat / m);
                   } else {
                     grad = gc * inv_std[c] * dy[base + j];
                   }
                   dx[base + j] += static_cast<float>(grad);
                 }
               }
             }
             if (gamma.requires_grad()) {
               auto dg = gamma.grad_buffer();
               for (std::int64_t c = 0; c < s.c; ++c) dg[c] += static_cast<float>(dgamma[c]);
             }
             if (beta.requires_grad()) {
               auto db = beta.grad_buffer();
               for (std::int64_t c = 0; c < s.c; ++c) db[c] += static_cast<float>(dbeta[c]);
             }
           });
  }
  return out;
}

}  // namespace drd::ops
