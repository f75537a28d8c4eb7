#include "drd/nn/blocks.hpp"

#include <algorithm>
#include <string>

#include "drd/core/error.hpp"

namespace drd::nn {

namespace {

void check_channels(const Tensor& x, std::int64_t expected, const char* block) {
  if (x.shape().c != expected) {
    throw DimensionError(std::string(block) + " expects " + std::to_string(expected) + " channels (axis 1), got " +
                         std::to_string(x.shape().c));
  }
}

std::int64_t checked_branch_count(const std::vector<int>& dilations) {
  if (dilations.empty()) throw ConfigError("DCCL needs at least one dilation");
  std::vector<int> sorted = dilations;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("DCCL dilations must be distinct");
  }
  return static_cast<std::int64_t>(dilations.size());
}

}  // namespace

RainResidualBlock::RainResidualBlock(std::int64_t channels, std::int64_t se_reduction)
    : conv1(channels, channels, 3),
      bn1(channels),
      act(channels),
      conv2(channels, channels, 3),
      bn2(channels),
      se(channels, se_reduction) {}

Tensor RainResidualBlock::forward(const Tensor& x, RrbTrace* trace) {
  check_channels(x, conv1.in_channels(), "rain residual block");
  Tensor branch = bn2.forward(conv2.forward(act.forward(bn1.forward(conv1.forward(x)))));
  SEResult gated = se.forward(branch);
  if (trace) *trace = {branch, gated.gate};
  return ops::add(x, gated.output);
}

std::vector<std::pair<std::string, Module*>> RainResidualBlock::children() {
  return {{"conv1", &conv1}, {"bn1", &bn1}, {"act", &act}, {"conv2", &conv2}, {"bn2", &bn2}, {"se", &se}};
}

DCCL::DCCL(std::int64_t channels, const std::vector<int>& dilations)
    : fuse_(checked_branch_count(dilations) * channels, channels, 1) {
  for (int d : dilations) branches_.push_back(std::make_unique<Conv2d>(channels, channels, 3, d));
}

Tensor DCCL::forward(const Tensor& x) const {
  check_channels(x, fuse_.out_channels(), "DCCL");
  std::vector<Tensor> parts;
  parts.reserve(branches_.size());
  for (const auto& b : branches_) parts.push_back(b->forward(x));
  return fuse_.forward(ops::concat_channels(parts));
}

std::vector<std::pair<std::string, Module*>> DCCL::children() {
  std::vector<std::pair<std::string, Module*>> out;
  for (const auto& b : branches_) out.emplace_back("conv_d" + std::to_string(b->dilation()), b.get());
  out.emplace_back("fuse", &fuse_);
  return out;
}

SDCAB::SDCAB(std::int64_t channels, const std::vector<int>& dilations)
    : dccl1(channels, dilations), bn1(channels), act(channels), dccl2(channels, dilations), bn2(channels) {}

Tensor SDCAB::forward(const Tensor& x) {
  check_channels(x, bn1.gamma.shape().c, "SDCAB");
  Tensor inner = act.forward(bn1.forward(dccl1.forward(x)));
  return ops::add(x, bn2.forward(dccl2.forward(inner)));
}

std::vector<std::pair<std::string, Module*>> SDCAB::children() {
  return {{"dccl1", &dccl1}, {"bn1", &bn1}, {"act", &act}, {"dccl2", &dccl2}, {"bn2", &bn2}};
}

}  // namespace drd::nn
