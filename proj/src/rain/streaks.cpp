#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "drd/core/error.hpp"
#include "drd/rain/synth.hpp"

namespace drd::rain {

void RainSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("rain spec: " + msg); };
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must be in [0, 1]");
  for (double a : light)
    if (!(a >= 0.0 && a <= 1.0)) fail("light must be in [0, 1]");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (!(l.density >= 0.0)) fail("density must be >= 0");
    if (!(l.length >= 1.0)) fail("length must be >= 1");
    if (!(l.width > 0.0)) fail("width must be > 0");
    if (!(l.intensity >= 0.0 && l.intensity <= 1.0)) fail("intensity must be in [0, 1]");
    for (std::size_t j = 0; j < i; ++j)
      if (layers[j].angle_deg == l.angle_deg) fail("layers " + std::to_string(j) + " and " + std::to_string(i) + " share a direction");
  }
}

namespace {

// Squared distance from (py, px) to the segment a-b.
double segment_dist2(double py, double px, double ay, double ax, double by, double bx) {
  const double vy = by - ay, vx = bx - ax;
  const double len2 = vy * vy + vx * vx;
  double t = len2 > 0 ? ((py - ay) * vy + (px - ax) * vx) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dy = py - (ay + t * vy), dx = px - (ax + t * vx);
  return dy * dy + dx * dx;
}

}  // namespace

Tensor synth_streak_layer(std::int64_t height, std::int64_t width, const StreakLayer& layer, Rng& rng) {
  if (!(layer.density >= 0.0) || !(layer.length >= 1.0) || !(layer.width > 0.0)) {
    throw ConfigError("streak layer needs density >= 0, length >= 1 and width > 0");
  }
  Tensor out = Tensor::zeros({1, 1, height, width});
  auto px = out.data();
  const auto count = static_cast<std::int64_t>(std::llround(layer.density * static_cast<double>(height * width) / 1000.0));
  const double sigma = layer.width / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const double reach = 3.0 * sigma;
  std::vector<double> acc(px.size(), 0.0);
  for (std::int64_t s = 0; s < count; ++s) {
    const double cy = rng.uniform(0.0, static_cast<double>(height));
    const double cx = rng.uniform(0.0, static_cast<double>(width));
    const double len = layer.length * rng.uniform(0.8, 1.2);
    const double peak = layer.intensity * rng.uniform(0.7, 1.0);
    const double theta = (layer.angle_deg + rng.uniform(-2.0, 2.0)) * std::numbers::pi / 180.0;
    const double hy = 0.5 * len * std::cos(theta), hx = 0.5 * len * std::sin(theta);
    const double ay = cy - hy, ax = cx - hx, by = cy + hy, bx = cx + hx;
    const auto y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::min(ay, by) - reach)));
    const auto y1 = std::min<std::int64_t>(height - 1, static_cast<std::int64_t>(std::ceil(std::max(ay, by) + reach)));
    const auto x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::min(ax, bx) - reach)));
    const auto x1 = std::min<std::int64_t>(width - 1, static_cast<std::int64_t>(std::ceil(std::max(ax, bx) + reach)));
    for (std::int64_t y = y0; y <= y1; ++y)
      for (std::int64_t x = x0; x <= x1; ++x) {
        // Pixel centres sit at half-integer coordinates.
        const double d2 = segment_dist2(static_cast<double>(y) + 0.5, static_cast<double>(x) + 0.5, ay, ax, by, bx);
        if (d2 > reach * reach) continue;
        acc[static_cast<std::size_t>(y * width + x)] += peak * std::exp(-d2 / (2.0 * sigma * sigma));
      }
  }
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(std::clamp(acc[i], 0.0, 1.0));
  return out;
}

RainResult apply_rain_model(const Image& background, const RainSpec& spec) {
  spec.validate();
  if (background.channels != 3) throw DimensionError("rain model expects an RGB background");
  const std::int64_t h = background.height, w = background.width;
  std::vector<float> field(static_cast<std::size_t>(h * w), 0.0f);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    Rng rng = Rng::derive(spec.seed, "rain.layer", i);
    Tensor layer = synth_streak_layer(h, w, spec.layers[i], rng);
    for (std::size_t p = 0; p < field.size(); ++p) field[p] += layer.data()[p];
  }
  RainResult r;
  r.streaks = Image::zeros(h, w);
  r.rainy = Image::zeros(h, w);
  const auto alpha = static_cast<float>(spec.alpha);
  for (std::int64_t c = 0; c < 3; ++c) {
    const float haze = static_cast<float>((1.0 - spec.alpha) * spec.light[static_cast<std::size_t>(c)]);
    for (std::int64_t p = 0; p < h * w; ++p) {
      const auto i = static_cast<std::size_t>(c * h * w + p);
      const float rv = std::clamp(field[static_cast<std::size_t>(p)], 0.0f, 1.0f);
      r.streaks.data[i] = rv;
      // With alpha = 1 the haze is +0 and the product exact, so this is the
      // additive model bit for bit.
      r.rainy.data[i] = std::clamp(alpha * (background.data[i] + rv) + haze, 0.0f, 1.0f);
    }
  }
  return r;
}

Image apply_additive_model(const Image& background, const Image& streaks) {
  if (background.data.size() != streaks.data.size()) throw DimensionError("additive model: image extents differ");
  Image o = background;
  for (std::size_t i = 0; i < o.data.size(); ++i) o.data[i] = std::clamp(background.data[i] + streaks.data[i], 0.0f, 1.0f);
  return o;
}

Image rain_target(const Image& rainy, const Image& background) {
  if (rainy.data.size() != background.data.size()) throw DimensionError("rain target: image extents differ");
  Image r = rainy;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] = rainy.data[i] - background.data[i];
  return r;
}

}  // namespace drd::rain
