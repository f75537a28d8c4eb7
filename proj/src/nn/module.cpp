#include "drd/nn/module.hpp"

#include <algorithm>

namespace drd::nn {

std::string join_name(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

void Module::visit(const std::string& prefix, const Visitor& fn) {
  visit_own(prefix, fn);
  for (auto& [name, child] : children()) child->visit(join_name(prefix, name), fn);
}

void Module::set_training(bool on) {
  training_ = on;
  for (auto& [name, child] : children()) child->set_training(on);
}

void Module::reset_parameters(Rng& rng) {
  reset_own(rng);
  for (auto& [name, child] : children()) child->reset_parameters(rng);
}

std::vector<NamedTensor> named_state(Module& m, const std::string& prefix) {
  std::vector<NamedTensor> out;
  m.visit(prefix, [&](const std::string& name, Tensor& t, StateKind kind) { out.push_back({name, t, kind}); });
  return out;
}

std::vector<NamedTensor> named_parameters(Module& m, const std::string& prefix) {
  auto all = named_state(m, prefix);
  std::erase_if(all, [](const NamedTensor& t) { return t.kind != StateKind::parameter; });
  return all;
}

std::int64_t count_parameters(Module& m) {
  std::int64_t total = 0;
  for (const auto& p : named_parameters(m)) total += p.value.numel();
  return total;
}

std::vector<std::pair<std::string, std::int64_t>> parameter_breakdown(Module& m, const std::string& prefix) {
  std::vector<std::pair<std::string, std::int64_t>> rows;
  for (const auto& p : named_parameters(m, prefix)) {
    const auto dot = p.name.rfind('.');
    std::string layer = dot == std::string::npos ? p.name : p.name.substr(0, dot);
    if (rows.empty() || rows.back().first != layer) rows.emplace_back(std::move(layer), 0);
    rows.back().second += p.value.numel();
  }
  return rows;
}

void zero_grad(Module& m) {
  m.visit("", [](const std::string&, Tensor& t, StateKind kind) {
    if (kind == StateKind::parameter) t.zero_grad();
  });
}

void fill_probe(Module& m, float weight) {
  m.visit("", [&](const std::string& name, Tensor& t, StateKind) {
    auto d = t.data();
    const auto dot = name.rfind('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    float v;
    if (leaf == "weight") v = weight;
    else if (leaf == "bias" || leaf == "beta" || leaf == "running_mean") v = 0.0f;
    else if (leaf == "gamma" || leaf == "running_var") v = 1.0f;
    else return;
    std::fill(d.begin(), d.end(), v);
  });
}

}  // namespace drd::nn
