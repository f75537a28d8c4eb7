#include "drd/training/adam.hpp"

#include <cmath>
#include <string>

#include "drd/core/error.hpp"

namespace drd::training {

OptimizerState make_optimizer_state(std::span<const nn::NamedTensor> params) {
  OptimizerState s;
  for (const auto& p : params) {
    s.m.emplace_back(static_cast<std::size_t>(p.value.numel()), 0.0f);
    s.v.emplace_back(static_cast<std::size_t>(p.value.numel()), 0.0f);
  }
  return s;
}

void adam_step(std::span<const nn::NamedTensor> params, OptimizerState& s, double lr) {
  if (s.m.size() != params.size() || s.v.size() != params.size()) {
    throw UsageError("adam: optimizer holds " + std::to_string(s.m.size()) + " moment pairs for " +
                     std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.value.has_grad()) throw UsageError("adam: parameter '" + p.name + "' has no gradient");
    if (s.m[i].size() != static_cast<std::size_t>(p.value.numel()) || s.v[i].size() != s.m[i].size()) {
      throw UsageError("adam: moments of '" + p.name + "' do not match its size");
    }
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor value = params[i].value;
    auto w = value.data();
    auto g = value.grad();
    auto& m = s.m[i];
    auto& v = s.v[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g[k];
      const double mk = s.beta1 * m[k] + (1.0 - s.beta1) * gk;
      const double vk = s.beta2 * v[k] + (1.0 - s.beta2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      w[k] = static_cast<float>(w[k] - lr * (mk / c1) / (std::sqrt(vk / c2) + s.eps));
    }
  }
}

}  // namespace drd::training
