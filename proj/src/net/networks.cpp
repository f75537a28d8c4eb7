#include "drd/net/networks.hpp"

#include <string>

#include "drd/core/error.hpp"

namespace drd::net {

void NetworkConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("network config: " + msg); };
  if (feature_maps < 1) fail("feature_maps must be >= 1");
  if (blocks_per_branch < 1) fail("blocks_per_branch must be >= 1, got " + std::to_string(blocks_per_branch));
  if (se_reduction < 1) fail("se_reduction must be >= 1");
  if (feature_maps < se_reduction) fail("feature_maps must be >= se_reduction");
  if (feature_maps % se_reduction != 0) fail("feature_maps must be divisible by se_reduction");
  if (image_channels < 1) fail("image_channels must be >= 1");
  if (dilations.empty()) fail("dilations must be non-empty");
  for (int d : dilations)
    if (d < 1) fail("dilations must be >= 1");
}

namespace {

const NetworkConfig& validated(const NetworkConfig& cfg) {
  cfg.validate();
  return cfg;
}

template <class Block>
std::unique_ptr<Block> make_block(const NetworkConfig& cfg);

template <>
std::unique_ptr<nn::RainResidualBlock> make_block(const NetworkConfig& cfg) {
  return std::make_unique<nn::RainResidualBlock>(cfg.feature_maps, cfg.se_reduction);
}

template <>
std::unique_ptr<nn::SDCAB> make_block(const NetworkConfig& cfg) {
  return std::make_unique<nn::SDCAB>(cfg.feature_maps, cfg.dilations);
}

}  // namespace

template <class Block>
BranchNetwork<Block>::BranchNetwork(const NetworkConfig& cfg)
    : encoder(validated(cfg).image_channels, cfg.feature_maps, 3),
      encoder_act(cfg.feature_maps),
      mid(cfg.feature_maps, cfg.feature_maps, 3),
      mid_bn(cfg.feature_maps),
      head(cfg.feature_maps, cfg.image_channels, 3) {
  for (std::int64_t i = 0; i < cfg.blocks_per_branch; ++i) blocks.push_back(make_block<Block>(cfg));
}

template <class Block>
Tensor BranchNetwork<Block>::check_input(const Tensor& x) const {
  if (x.shape().c != encoder.in_channels()) {
    throw DimensionError("network expects " + std::to_string(encoder.in_channels()) +
                         " image channels (axis 1), got " + std::to_string(x.shape().c));
  }
  return encoder_act.forward(encoder.forward(x));
}

template <class Block>
std::vector<std::pair<std::string, nn::Module*>> BranchNetwork<Block>::children() {
  std::vector<std::pair<std::string, Module*>> out{{"encoder", &encoder}, {"encoder_act", &encoder_act}};
  for (std::size_t i = 0; i < blocks.size(); ++i) out.emplace_back("block" + std::to_string(i), blocks[i].get());
  out.emplace_back("mid", &mid);
  out.emplace_back("mid_bn", &mid_bn);
  out.emplace_back("head", &head);
  return out;
}

template class BranchNetwork<nn::RainResidualBlock>;
template class BranchNetwork<nn::SDCAB>;

Tensor RainResidualNetwork::forward(const Tensor& o, std::int64_t trace_block, nn::RrbTrace* trace) {
  if (trace && (trace_block < 0 || trace_block >= static_cast<std::int64_t>(blocks.size()))) {
    throw UsageError("block index " + std::to_string(trace_block) + " out of range [0, " +
                     std::to_string(blocks.size()) + ")");
  }
  Tensor layer0 = check_input(o);
  Tensor x = layer0;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    x = blocks[i]->forward(x, static_cast<std::int64_t>(i) == trace_block ? trace : nullptr);
  x = mid_bn.forward(mid.forward(x));
  return head.forward(ops::add(layer0, x));
}

Tensor DetailRepairNetwork::forward(const Tensor& o) {
  Tensor layer0 = check_input(o);
  Tensor x = layer0;
  for (auto& b : blocks) x = b->forward(x);
  x = mid_bn.forward(mid.forward(x));
  return head.forward(ops::add(layer0, x));
}

DRDNet::DRDNet(const NetworkConfig& cfg) : rrn(cfg), cfg_(cfg) {
  if (cfg.detail_branch) drn = std::make_unique<DetailRepairNetwork>(cfg);
}

DrdOutputs DRDNet::forward(const Tensor& o) {
  DrdOutputs out;
  out.rain = rrn.forward(o);
  out.preliminary = ops::sub(o, out.rain);
  if (drn) {
    out.detail = drn->forward(o);
    out.composed = ops::add(out.preliminary, out.detail);
  } else {
    out.detail = Tensor::zeros(o.shape());
    out.composed = out.preliminary;
  }
  return out;
}

void DRDNet::initialize(std::uint64_t seed) {
  Rng rrn_rng = Rng::derive(seed, "init.rrn");
  rrn.reset_parameters(rrn_rng);
  if (drn) {
    Rng drn_rng = Rng::derive(seed, "init.drn");
    drn->reset_parameters(drn_rng);
  }
  // Both branches start close to R = 0 and I_r = 0, so I_c starts near O.
  auto shrink = [](nn::Conv2d& c) {
    for (Tensor t : {c.weight, c.bias})
      for (float& v : t.data()) v *= kHeadInitScale;
  };
  shrink(rrn.head);
  if (drn) shrink(drn->head);
}

void DRDNet::zero_output_layers() {
  rrn.head.zero();
  if (drn) drn->head.zero();
}

std::vector<std::pair<std::string, nn::Module*>> DRDNet::children() {
  std::vector<std::pair<std::string, Module*>> out{{"rrn", &rrn}};
  if (drn) out.emplace_back("drn", drn.get());
  return out;
}

}  // namespace drd::net
