#include <algorithm>
#include <cmath>
#include <numeric>

#include "drd/analysis/analysis.hpp"
#include "drd/core/error.hpp"
#include "drd/tensor/graph.hpp"

namespace drd::analysis {

BoundingBox impulse_response_support(const std::vector<Stage>& stages, std::int64_t channels, std::int64_t height,
                                     std::int64_t width, std::int64_t cy, std::int64_t cx) {
  if (cy < 0 || cy >= height || cx < 0 || cx >= width) {
    throw UsageError("impulse at (" + std::to_string(cy) + ", " + std::to_string(cx) + ") is outside the " +
                     std::to_string(height) + "x" + std::to_string(width) + " canvas");
  }
  NoGradGuard guard;
  Tensor x = Tensor::zeros({1, channels, height, width});
  for (std::int64_t c = 0; c < channels; ++c) x.at(0, c, cy, cx) = 1.0f;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    x = stages[i](x);
    if (i + 1 < stages.size())
      for (float& v : x.data()) v = std::abs(v) > 1e-12f ? 1.0f : 0.0f;
  }
  BoundingBox box{x.shape().h, x.shape().w, -1, -1};
  const Shape& s = x.shape();
  for (std::int64_t c = 0; c < s.c; ++c)
    for (std::int64_t y = 0; y < s.h; ++y)
      for (std::int64_t xx = 0; xx < s.w; ++xx)
        if (std::abs(x.at(0, c, y, xx)) > 1e-12) {
          box.y0 = std::min(box.y0, y);
          box.y1 = std::max(box.y1, y);
          box.x0 = std::min(box.x0, xx);
          box.x1 = std::max(box.x1, xx);
        }
  return box;
}

std::vector<Stage> detail_repair_stages(net::DetailRepairNetwork& drn) {
  std::vector<Stage> stages;
  stages.emplace_back([&drn](const Tensor& x) { return drn.encoder_act.forward(drn.encoder.forward(x)); });
  for (auto& b : drn.blocks) stages.emplace_back([blk = b.get()](const Tensor& x) { return blk->forward(x); });
  // The long skip adds the encoder output, whose support lies inside that of
  // the block stack (every block is residual), so it is left out here.
  stages.emplace_back([&drn](const Tensor& x) { return drn.mid_bn.forward(drn.mid.forward(x)); });
  stages.emplace_back([&drn](const Tensor& x) { return drn.head.forward(x); });
  return stages;
}

std::vector<std::int64_t> rank_channels(const std::vector<float>& gates, bool descending) {
  std::vector<std::int64_t> idx(gates.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
    const float ga = gates[static_cast<std::size_t>(a)], gb = gates[static_cast<std::size_t>(b)];
    return descending ? ga > gb : ga < gb;
  });
  return idx;
}

Image normalized_map(const Tensor& features, std::int64_t channel) {
  const Shape& s = features.shape();
  if (channel < 0 || channel >= s.c) throw UsageError("channel " + std::to_string(channel) + " out of range");
  Image img = Image::zeros(s.h, s.w);
  float lo = INFINITY, hi = -INFINITY;
  for (std::int64_t y = 0; y < s.h; ++y)
    for (std::int64_t x = 0; x < s.w; ++x) {
      lo = std::min(lo, features.at(0, channel, y, x));
      hi = std::max(hi, features.at(0, channel, y, x));
    }
  const float span = hi - lo;
  for (std::int64_t y = 0; y < s.h; ++y)
    for (std::int64_t x = 0; x < s.w; ++x) {
      const float v = span > 0 ? (features.at(0, channel, y, x) - lo) / span : 0.0f;
      for (std::int64_t c = 0; c < 3; ++c) img.at(c, y, x) = v;
    }
  return img;
}

SeGateReport se_gate_report(net::DRDNet& model, const Image& o, std::int64_t block, std::int64_t top_k) {
  if (top_k < 0) throw UsageError("top_k must be >= 0");
  NoGradGuard guard;
  const bool was_training = model.training();
  model.set_training(false);
  nn::RrbTrace trace;
  try {
    model.rrn.forward(to_tensor(o), block, &trace);
  } catch (...) {
    model.set_training(was_training);
    throw;
  }
  model.set_training(was_training);

  SeGateReport rep;
  rep.block = block;
  rep.gates.assign(trace.gate.data().begin(), trace.gate.data().end());
  const auto m = static_cast<std::int64_t>(rep.gates.size());
  rep.clamped = top_k > m;
  const auto k = static_cast<std::size_t>(std::min(top_k, m));
  rep.top = rank_channels(rep.gates, true);
  rep.bottom = rank_channels(rep.gates, false);
  rep.top.resize(k);
  rep.bottom.resize(k);
  for (auto c : rep.top) rep.top_maps.push_back(normalized_map(trace.branch, c));
  for (auto c : rep.bottom) rep.bottom_maps.push_back(normalized_map(trace.branch, c));
  return rep;
}

}  // namespace drd::analysis
