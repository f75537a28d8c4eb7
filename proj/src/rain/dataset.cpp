#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include "drd/core/error.hpp"
#include "drd/core/parallel.hpp"
#include "drd/rain/synth.hpp"

namespace drd::rain {

namespace fs = std::filesystem;

void RainDistribution::validate() const {
  auto fail = [this](const std::string& msg) { throw ConfigError("rain distribution '" + name + "': " + msg); };
  auto ordered = [&](const Range& r, const char* what) {
    if (!(r.lo <= r.hi)) fail(std::string(what) + " range is empty");
  };
  ordered(angle_deg, "angle");
  ordered(length, "length");
  ordered(width, "width");
  ordered(density, "density");
  ordered(intensity, "intensity");
  ordered(alpha, "alpha");
  ordered(light, "light");
  if (min_layers < 0 || max_layers < min_layers) fail("need 0 <= min_layers <= max_layers");
  if (length.lo < 1.0) fail("length must be >= 1");
  if (width.lo <= 0.0) fail("width must be > 0");
  if (density.lo < 0.0) fail("density must be >= 0");
  if (intensity.lo < 0.0 || intensity.hi > 1.0) fail("intensity must be in [0, 1]");
  if (alpha.lo < 0.0 || alpha.hi > 1.0) fail("alpha must be in [0, 1]");
  if (light.lo < 0.0 || light.hi > 1.0) fail("light must be in [0, 1]");
  if (max_layers > 1 && (min_angle_gap_deg <= 0.0 ||
                         static_cast<double>(max_layers - 1) * min_angle_gap_deg > angle_deg.hi - angle_deg.lo)) {
    fail("angle range too narrow for " + std::to_string(max_layers) + " distinct directions");
  }
}

RainSpec RainDistribution::sample(Rng& rng) const {
  RainSpec spec;
  const auto n = min_layers + static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(max_layers - min_layers + 1)));
  for (std::int64_t i = 0; i < n; ++i) {
    StreakLayer l;
    // Rejection sampling keeps directions apart; validate() guarantees room.
    // The last attempt falls back to evenly spread angles.
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      l.angle_deg = angle_deg.draw(rng);
      placed = std::all_of(spec.layers.begin(), spec.layers.end(), [&](const StreakLayer& o) {
        return std::abs(o.angle_deg - l.angle_deg) >= min_angle_gap_deg;
      });
    }
    if (!placed) l.angle_deg = angle_deg.lo + (angle_deg.hi - angle_deg.lo) * static_cast<double>(i) / static_cast<double>(std::max<std::int64_t>(1, n - 1));
    l.length = length.draw(rng);
    l.width = width.draw(rng);
    l.density = density.draw(rng);
    l.intensity = intensity.draw(rng);
    spec.layers.push_back(l);
  }
  spec.alpha = alpha.draw(rng);
  const double a = light.draw(rng);
  spec.light = {a, a, a};
  spec.seed = rng.next_u64();
  return spec;
}

RainDistribution preset(const std::string& name) {
  RainDistribution d;
  d.name = name;
  if (name == "light") {
    d.min_layers = d.max_layers = 1;
    d.angle_deg = {-15, 15};
    d.length = {10, 20};
    d.width = {0.8, 1.2};
    d.density = {2, 4};
    d.intensity = {0.25, 0.45};
  } else if (name == "heavy") {
    d.min_layers = 2;
    d.max_layers = 3;
    d.angle_deg = {-30, 30};
    d.length = {15, 30};
    d.width = {1.0, 1.8};
    d.density = {3, 5};
    d.intensity = {0.3, 0.5};
    d.alpha = {0.85, 0.95};
    d.light = {0.7, 0.9};
  } else {
    throw ConfigError("unknown rain preset '" + name + "' (expected light or heavy)");
  }
  return d;
}

Image procedural_background(std::int64_t height, std::int64_t width, Rng& rng) {
  Image img = Image::zeros(height, width);
  auto colour = [&](double lo, double hi) {
    return std::array<double, 3>{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  };
  const auto top = colour(0.3, 0.7), bottom = colour(0.1, 0.5);
  std::vector<double> px(img.data.size());
  for (std::int64_t y = 0; y < height; ++y) {
    const double t = height > 1 ? static_cast<double>(y) / static_cast<double>(height - 1) : 0.0;
    for (std::int64_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        px[static_cast<std::size_t>((static_cast<std::int64_t>(c) * height + y) * width + x)] = (1 - t) * top[c] + t * bottom[c];
  }
  const auto shapes = 3 + rng.uniform_int(4);
  for (std::uint64_t s = 0; s < shapes; ++s) {
    const bool disc = rng.uniform() < 0.5;
    const double cy = rng.uniform(0, static_cast<double>(height)), cx = rng.uniform(0, static_cast<double>(width));
    const double ry = rng.uniform(0.08, 0.3) * static_cast<double>(height);
    const double rx = rng.uniform(0.08, 0.3) * static_cast<double>(width);
    const auto col = colour(0.05, 0.75);
    for (std::int64_t y = 0; y < height; ++y)
      for (std::int64_t x = 0; x < width; ++x) {
        const double dy = (static_cast<double>(y) + 0.5 - cy) / ry, dx = (static_cast<double>(x) + 0.5 - cx) / rx;
        // Signed distance-like value, negative inside; edges soften over about a pixel.
        const double inside = disc ? std::sqrt(dy * dy + dx * dx) - 1.0 : std::max(std::abs(dy), std::abs(dx)) - 1.0;
        const double cover = std::clamp(0.5 - inside * std::min(ry, rx) / 1.5, 0.0, 1.0);
        if (cover == 0.0) continue;
        for (std::size_t c = 0; c < 3; ++c) {
          double& v = px[static_cast<std::size_t>((static_cast<std::int64_t>(c) * height + y) * width + x)];
          v = (1 - cover) * v + cover * col[c];
        }
      }
  }
  const double fy = rng.uniform(0.2, 0.9), fx = rng.uniform(0.2, 0.9), phase = rng.uniform(0, 2 * std::numbers::pi);
  for (std::int64_t y = 0; y < height; ++y)
    for (std::int64_t x = 0; x < width; ++x) {
      const double tex = 0.03 * std::sin(fy * static_cast<double>(y) + fx * static_cast<double>(x) + phase);
      for (std::int64_t c = 0; c < 3; ++c) {
        const auto i = static_cast<std::size_t>((c * height + y) * width + x);
        img.data[i] = static_cast<float>(std::clamp(px[i] + tex, 0.0, 1.0));
      }
    }
  return img;
}

namespace {

std::string sample_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

}  // namespace

Dataset make_dataset(const std::vector<Image>& backgrounds, const RainDistribution& dist, std::size_t count,
                     std::uint64_t seed) {
  if (backgrounds.empty()) throw UsageError("make_dataset: no background images");
  dist.validate();
  Dataset ds;
  ds.samples.resize(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = Rng::derive(seed, "rain.sample", i);
    Sample& s = ds.samples[i];
    s.id = sample_id(i);
    s.background = backgrounds[i % backgrounds.size()];
    s.spec = dist.sample(rng);
    auto r = apply_rain_model(s.background, s.spec);
    s.rainy = std::move(r.rainy);
    s.streaks = std::move(r.streaks);
  });
  ds.manifest = manifest_header();
  for (const Sample& s : ds.samples) ds.manifest += manifest_line(s);
  return ds;
}

std::string manifest_header() {
  return "# id seed alpha light_r light_g light_b layers [angle_deg length width density intensity]...\n";
}

std::string manifest_line(const Sample& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %llu %.6f %.6f %.6f %.6f %zu", s.id.c_str(),
                static_cast<unsigned long long>(s.spec.seed), s.spec.alpha, s.spec.light[0], s.spec.light[1],
                s.spec.light[2], s.spec.layers.size());
  std::string line = buf;
  for (const StreakLayer& l : s.spec.layers) {
    std::snprintf(buf, sizeof buf, " %.6f %.6f %.6f %.6f %.6f", l.angle_deg, l.length, l.width, l.density, l.intensity);
    line += buf;
  }
  return line + "\n";
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  for (const char* sub : {"rain", "norain", "streaks"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw IoError("cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  for (const Sample& s : ds.samples) {
    save_image(s.rainy, dir / "rain" / (s.id + ".png"));
    save_image(s.background, dir / "norain" / (s.id + ".png"));
    save_image(s.streaks, dir / "streaks" / (s.id + ".png"));
  }
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << ds.manifest;
  if (!out) throw IoError("cannot write " + (dir / "manifest.txt").string());
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Pair> load_pairs(const fs::path& dir) {
  const auto rainy = list_pngs(dir / "rain");
  const auto clean = list_pngs(dir / "norain");
  std::set<std::string> clean_ids;
  for (const auto& p : clean) clean_ids.insert(p.stem().string());
  std::vector<Pair> out;
  for (const auto& p : rainy) {
    const std::string id = p.stem().string();
    if (!clean_ids.count(id)) throw IoError("no norain/" + id + ".png for " + p.string());
    clean_ids.erase(id);
    out.push_back({id, load_image(p), load_image(dir / "norain" / (id + ".png"))});
    if (out.back().rainy.height != out.back().background.height || out.back().rainy.width != out.back().background.width) {
      throw IoError("rain/" + id + ".png and norain/" + id + ".png differ in size");
    }
  }
  if (!clean_ids.empty()) throw IoError("norain/" + *clean_ids.begin() + ".png has no rainy counterpart");
  return out;
}

}  // namespace drd::rain
