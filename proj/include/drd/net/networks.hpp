#pragma once

#include <memory>
#include <string>
#include <vector>

#include "drd/nn/blocks.hpp"

namespace drd::net {

struct NetworkConfig {
  std::int64_t feature_maps = 64;
  std::int64_t blocks_per_branch = 16;
  std::int64_t se_reduction = 16;
  std::vector<int> dilations{1, 3, 5};
  std::int64_t image_channels = 3;
  /// false builds the rain branch only: I_r = 0 and I_c = I_p.
  bool detail_branch = true;

  /// Throws ConfigError on an invalid combination.
  void validate() const;
  /// Encoder conv, the blocks, mid conv and output conv.
  std::int64_t depth_per_branch() const { return blocks_per_branch + 3; }
  bool operator==(const NetworkConfig&) const = default;
};

/// encoder conv + PReLU -> blocks -> conv + BN -> add encoder output -> conv.
template <class Block>
class BranchNetwork : public nn::Module {
 public:
  explicit BranchNetwork(const NetworkConfig& cfg);

  nn::Conv2d encoder;
  nn::PReLU encoder_act;
  std::vector<std::unique_ptr<Block>> blocks;
  nn::Conv2d mid;
  nn::BatchNorm2d mid_bn;
  nn::Conv2d head;

 protected:
  Tensor check_input(const Tensor& x) const;
  std::vector<std::pair<std::string, Module*>> children() override;
};

class RainResidualNetwork : public BranchNetwork<nn::RainResidualBlock> {
 public:
  using BranchNetwork::BranchNetwork;

  /// Rain streak estimate R. When `trace` is set, block `trace_block`
  /// records its branch features and SE gate there.
  Tensor forward(const Tensor& o, std::int64_t trace_block = -1, nn::RrbTrace* trace = nullptr);
};

class DetailRepairNetwork : public BranchNetwork<nn::SDCAB> {
 public:
  using BranchNetwork::BranchNetwork;

  /// Detail image I_r.
  Tensor forward(const Tensor& o);
};

struct DrdOutputs {
  Tensor rain;         // R
  Tensor preliminary;  // I_p = O - R
  Tensor detail;       // I_r
  Tensor composed;     // I_c = I_p + I_r
};

class DRDNet : public nn::Module {
 public:
  explicit DRDNet(const NetworkConfig& cfg);

  DrdOutputs forward(const Tensor& o);

  const NetworkConfig& config() const { return cfg_; }
  bool has_detail_branch() const { return drn != nullptr; }

  /// Output convolutions start at this fraction of their Kaiming draw.
  static constexpr float kHeadInitScale = 0.1f;

  /// Kaiming-style initialization from a seed.
  void initialize(std::uint64_t seed);
  /// Zeroes both output convolutions so that R = 0 and I_r = 0.
  void zero_output_layers();

  RainResidualNetwork rrn;
  std::unique_ptr<DetailRepairNetwork> drn;

 protected:
  std::vector<std::pair<std::string, Module*>> children() override;

 private:
  NetworkConfig cfg_;
};

}  // namespace drd::net
