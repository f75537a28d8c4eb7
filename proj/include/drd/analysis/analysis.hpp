#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "drd/image/image.hpp"
#include "drd/net/networks.hpp"

namespace drd::analysis {

/// One stage of a receptive-field chain. `conv` is a single k x k kernel
/// with one dilation, `dccl` runs one k x k branch per dilation in parallel,
/// `block` applies `parts` in sequence.
struct LayerDescriptor {
  enum class Kind { conv, dccl, block };

  Kind kind = Kind::conv;
  int kernel = 3;
  int stride = 1;
  std::vector<int> dilations{1};
  std::vector<LayerDescriptor> parts;
  std::string label;

  static LayerDescriptor conv(int kernel, int dilation = 1, int stride = 1, std::string label = "conv");
  static LayerDescriptor dccl(std::vector<int> dilations, int kernel = 3);
  static LayerDescriptor block(std::vector<LayerDescriptor> parts, std::string label);
};

struct RFRow {
  std::int64_t layer = 0;
  std::string label;
  std::int64_t receptive_field = 0;  // side length
  std::int64_t jump = 1;
  std::optional<std::int64_t> table_formula;
};

struct RFReport {
  std::vector<RFRow> rows;

  /// Aligned text table, one column per layer as in the architecture table.
  std::string table() const;
};

/// r0 = 1, j0 = 1; each conv does r += (k - 1) d j, j *= s; a dccl adds the
/// largest of its branches; blocks compose their parts.
RFReport receptive_field(const std::vector<LayerDescriptor>& chain);

/// Layer chains of the two branches: encoder conv, the blocks, the mid conv
/// and the output conv. The 1x1 fuse and the long skip do not widen the field.
std::vector<LayerDescriptor> detail_repair_chain(const net::NetworkConfig& cfg);
std::vector<LayerDescriptor> rain_residual_chain(const net::NetworkConfig& cfg);

/// Published per-layer formula for the detail branch with `blocks` blocks:
/// 3 at layer 0, (d - 1) 14 + 17 at block layer d, then +2 per 3x3 conv.
std::int64_t table_formula(std::int64_t layer, std::int64_t blocks);

/// Detail-branch chain with the formula column filled in.
RFReport detail_repair_report(const net::NetworkConfig& cfg);

struct BoundingBox {
  std::int64_t y0 = 0, x0 = 0, y1 = -1, x1 = -1;  // inclusive
  std::int64_t height() const { return y1 - y0 + 1; }
  std::int64_t width() const { return x1 - x0 + 1; }
  bool empty() const { return y1 < y0 || x1 < x0; }
};

using Stage = std::function<Tensor(const Tensor&)>;

/// Feeds a unit impulse (every channel, pixel (cy, cx)) through `stages` and
/// returns the box of outputs with |v| > 1e-12. Between stages each nonzero
/// value is reset to 1, which keeps deep stacks inside float range; with the
/// non-negative probe weights of nn::fill_probe every path is positive, so
/// the support of a stage depends only on the support of its input and the
/// reset does not change the result. UsageError when the impulse is outside
/// the canvas.
BoundingBox impulse_response_support(const std::vector<Stage>& stages, std::int64_t channels, std::int64_t height,
                                     std::int64_t width, std::int64_t cy, std::int64_t cx);

/// The detail branch split into encoder, blocks, and tail stages. The model
/// must already hold probe weights and be in eval mode.
std::vector<Stage> detail_repair_stages(net::DetailRepairNetwork& drn);

struct SeGateReport {
  std::int64_t block = 0;
  std::vector<float> gates;
  std::vector<std::int64_t> top;     // highest gates first
  std::vector<std::int64_t> bottom;  // lowest gates first
  std::vector<Image> top_maps;       // gated-branch input features, min-max normalized
  std::vector<Image> bottom_maps;
  bool clamped = false;  // requested top_k exceeded the channel count
};

/// Gates of rain residual block `block` for image `o` (eval mode). Ties rank
/// by ascending channel index in both lists. top_k is clamped to M.
SeGateReport se_gate_report(net::DRDNet& model, const Image& o, std::int64_t block, std::int64_t top_k);

/// Ranking used by se_gate_report.
std::vector<std::int64_t> rank_channels(const std::vector<float>& gates, bool descending);

/// Single-channel plane mapped to [0, 1] (constant planes become 0),
/// replicated to RGB.
Image normalized_map(const Tensor& features, std::int64_t channel);

}  // namespace drd::analysis
