#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drd/core/rng.hpp"
#include "drd/image/image.hpp"
#include "drd/tensor/tensor.hpp"

namespace drd::rain {

/// One layer of parallel streaks.
struct StreakLayer {
  double angle_deg = 0.0;  // from vertical, positive leans right
  double length = 15.0;    // px
  double width = 1.0;      // px, full width at half maximum of the cross profile
  double density = 3.0;    // streaks per 1000 pixels
  double intensity = 0.3;  // peak added brightness

  bool operator==(const StreakLayer&) const = default;
};

struct RainSpec {
  std::vector<StreakLayer> layers;
  double alpha = 1.0;  // atmospheric transmission; 1 is the additive model
  std::array<double, 3> light{0.8, 0.8, 0.8};
  std::uint64_t seed = 0;

  /// ConfigError on out-of-range fields or repeated layer angles.
  void validate() const;
  bool operator==(const RainSpec&) const = default;
};

/// Sparse non-negative streak map (1, 1, h, w) in [0, 1].
Tensor synth_streak_layer(std::int64_t height, std::int64_t width, const StreakLayer& layer, Rng& rng);

struct RainResult {
  Image rainy;    // O
  Image streaks;  // R = clamp(sum of layers), replicated to three channels
};

/// O = clamp(alpha (B + R) + (1 - alpha) A). Layer i draws from the stream
/// derived from (spec.seed, i).
RainResult apply_rain_model(const Image& background, const RainSpec& spec);

/// O = clamp(B + R).
Image apply_additive_model(const Image& background, const Image& streaks);

/// Training target for the rain branch: O - B, which can be negative when
/// alpha < 1 or where O saturates.
Image rain_target(const Image& rainy, const Image& background);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double draw(Rng& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

/// Ranges each sample's RainSpec is drawn from.
struct RainDistribution {
  std::string name = "custom";
  std::int64_t min_layers = 1;
  std::int64_t max_layers = 1;
  Range angle_deg{-15, 15};
  /// Layer angles within one sample differ by at least this much.
  double min_angle_gap_deg = 8.0;
  Range length{10, 20};
  Range width{0.8, 1.2};
  Range density{2, 4};
  Range intensity{0.2, 0.4};
  Range alpha{1, 1};
  Range light{0.8, 0.8};

  void validate() const;
  RainSpec sample(Rng& rng) const;
};

/// "light" (sparse thin single-layer streaks) or "heavy" (dense, several
/// directions, haze). Anything else is a ConfigError.
RainDistribution preset(const std::string& name);

/// Smooth synthetic scene: gradient sky, soft shapes and mild texture.
Image procedural_background(std::int64_t height, std::int64_t width, Rng& rng);

struct Sample {
  std::string id;
  Image rainy;
  Image background;
  Image streaks;
  RainSpec spec;
};

struct Dataset {
  std::vector<Sample> samples;
  std::string manifest;
};

/// Sample i uses background i mod |backgrounds| and the stream derived from
/// (seed, i), so the result is independent of the thread count.
Dataset make_dataset(const std::vector<Image>& backgrounds, const RainDistribution& dist, std::size_t count,
                     std::uint64_t seed);

std::string manifest_header();
std::string manifest_line(const Sample& s);

/// rain/<id>.png, norain/<id>.png, streaks/<id>.png and manifest.txt.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct Pair {
  std::string id;
  Image rainy;
  Image background;
};

/// Pairs from rain/ and norain/, sorted by id. IoError when a directory is
/// missing or the two sets of ids differ.
std::vector<Pair> load_pairs(const std::filesystem::path& dir);

/// All *.png files in a directory, sorted by file name.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

}  // namespace drd::rain
