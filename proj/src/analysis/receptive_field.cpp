#include <algorithm>
#include <cstdio>

#include "drd/analysis/analysis.hpp"
#include "drd/core/error.hpp"

namespace drd::analysis {

LayerDescriptor LayerDescriptor::conv(int kernel, int dilation, int stride, std::string label) {
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel must be odd and positive, got " + std::to_string(kernel));
  if (stride < 1 || dilation < 1) throw ConfigError("stride and dilation must be >= 1");
  LayerDescriptor d;
  d.kind = Kind::conv;
  d.kernel = kernel;
  d.stride = stride;
  d.dilations = {dilation};
  d.label = std::move(label);
  return d;
}

LayerDescriptor LayerDescriptor::dccl(std::vector<int> dilations, int kernel) {
  if (dilations.empty()) throw ConfigError("dccl needs at least one dilation");
  LayerDescriptor d = conv(kernel, 1, 1, "dccl");
  d.kind = Kind::dccl;
  d.dilations = std::move(dilations);
  return d;
}

LayerDescriptor LayerDescriptor::block(std::vector<LayerDescriptor> parts, std::string label) {
  LayerDescriptor d;
  d.kind = Kind::block;
  d.parts = std::move(parts);
  d.label = std::move(label);
  return d;
}

namespace {

void apply(const LayerDescriptor& d, std::int64_t& r, std::int64_t& j) {
  switch (d.kind) {
    case LayerDescriptor::Kind::conv:
    case LayerDescriptor::Kind::dccl: {
      const int dmax = *std::max_element(d.dilations.begin(), d.dilations.end());
      r += static_cast<std::int64_t>(d.kernel - 1) * dmax * j;
      j *= d.stride;
      break;
    }
    case LayerDescriptor::Kind::block:
      for (const auto& p : d.parts) apply(p, r, j);
      break;
  }
}

std::vector<LayerDescriptor> branch_chain(const net::NetworkConfig& cfg, const LayerDescriptor& block) {
  std::vector<LayerDescriptor> chain{LayerDescriptor::conv(3, 1, 1, "conv")};
  for (std::int64_t i = 0; i < cfg.blocks_per_branch; ++i) chain.push_back(block);
  chain.push_back(LayerDescriptor::conv(3, 1, 1, "conv"));
  chain.push_back(LayerDescriptor::conv(3, 1, 1, "conv"));
  return chain;
}

}  // namespace

RFReport receptive_field(const std::vector<LayerDescriptor>& chain) {
  if (chain.empty()) throw UsageError("receptive_field: empty layer chain");
  RFReport rep;
  std::int64_t r = 1, j = 1;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    apply(chain[i], r, j);
    rep.rows.push_back({static_cast<std::int64_t>(i), chain[i].label, r, j, std::nullopt});
  }
  return rep;
}

std::vector<LayerDescriptor> detail_repair_chain(const net::NetworkConfig& cfg) {
  const auto dccl = LayerDescriptor::dccl(cfg.dilations);
  return branch_chain(cfg, LayerDescriptor::block({dccl, dccl}, "SDCAB"));
}

std::vector<LayerDescriptor> rain_residual_chain(const net::NetworkConfig& cfg) {
  const auto c = LayerDescriptor::conv(3);
  return branch_chain(cfg, LayerDescriptor::block({c, c}, "RRB"));
}

std::int64_t table_formula(std::int64_t layer, std::int64_t blocks) {
  if (layer < 0 || layer > blocks + 2) throw UsageError("table_formula: layer " + std::to_string(layer) + " out of range");
  if (layer == 0) return 3;
  if (layer <= blocks) return (layer - 1) * 14 + 17;
  return (blocks - 1) * 14 + 17 + 2 * (layer - blocks);
}

RFReport detail_repair_report(const net::NetworkConfig& cfg) {
  RFReport rep = receptive_field(detail_repair_chain(cfg));
  for (auto& row : rep.rows) row.table_formula = table_formula(row.layer, cfg.blocks_per_branch);
  return rep;
}

std::string RFReport::table() const {
  auto cell = [](const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%10s", s.c_str());
    return std::string(buf);
  };
  auto side = [](std::int64_t r) { return std::to_string(r) + "x" + std::to_string(r); };
  std::string layer = cell("layer"), kind = cell("type"), computed = cell("computed"), formula = cell("formula");
  const bool has_formula = std::any_of(rows.begin(), rows.end(), [](const RFRow& r) { return r.table_formula.has_value(); });
  for (const auto& r : rows) {
    layer += cell(std::to_string(r.layer));
    kind += cell(r.label);
    computed += cell(side(r.receptive_field));
    formula += cell(r.table_formula ? side(*r.table_formula) : "-");
  }
  std::string out = layer + "\n" + kind + "\n" + computed + "\n";
  if (has_formula) out += formula + "\n";
  return out;
}

}  // namespace drd::analysis
