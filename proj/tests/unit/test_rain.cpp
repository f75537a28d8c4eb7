#include <doctest.h>
#include <png.h>

#include <cmath>
#include <fstream>

#include "drd/core/error.hpp"
#include "drd/core/parallel.hpp"
#include "drd/metrics/quality.hpp"
#include "drd/rain/synth.hpp"
#include "support/tempdir.hpp"

using namespace drd;
using namespace drd::rain;
using drd::testing::TempDir;

namespace {

Image flat(std::int64_t h, std::int64_t w, float v) {
  Image img = Image::zeros(h, w);
  for (float& x : img.data) x = v;
  return img;
}

std::vector<Image> backgrounds(std::size_t n, std::int64_t side) {
  std::vector<Image> out;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::derive(99, "test.bg", i);
    out.push_back(procedural_background(side, side, rng));
  }
  return out;
}

bool in_unit_range(const Image& img) {
  for (float v : img.data)
    if (!(v >= 0.0f && v <= 1.0f)) return false;
  return true;
}

}  // namespace

TEST_CASE("streak layer") {
  StreakLayer l;
  l.density = 0.0;
  Rng rng(1);
  for (float v : synth_streak_layer(32, 40, l, rng).data()) CHECK(v == 0.0f);

  l = {};
  l.intensity = 1.0;
  l.density = 20.0;
  Rng a(5), b(5);
  Tensor la = synth_streak_layer(48, 48, l, a), lb = synth_streak_layer(48, 48, l, b);
  CHECK(la.shape() == Shape{1, 1, 48, 48});
  CHECK(std::equal(la.data().begin(), la.data().end(), lb.data().begin()));
  for (float v : la.data()) CHECK((v >= 0.0f && v <= 1.0f));

  l.length = 0.5;
  CHECK_THROWS_AS(synth_streak_layer(8, 8, l, rng), ConfigError);
}

TEST_CASE("streak coverage grows with density") {
  double prev = -1.0;
  for (double density : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    StreakLayer l;
    l.density = density;
    double covered = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      Tensor t = synth_streak_layer(64, 64, l, rng);
      for (float v : t.data()) covered += v > 0.0f;
    }
    const double fraction = covered / (20.0 * 64 * 64);
    CAPTURE(density);
    CHECK(fraction > prev);
    prev = fraction;
  }
}

TEST_CASE("rain model") {
  const Image b = backgrounds(1, 32)[0];

  RainSpec none;
  auto r0 = apply_rain_model(b, none);
  CHECK(r0.rainy == b);
  for (float v : r0.streaks.data) CHECK(v == 0.0f);

  RainSpec spec;
  spec.layers = {StreakLayer{10, 12, 1, 6, 0.5}, StreakLayer{-10, 12, 1, 6, 0.5}};
  spec.seed = 3;
  spec.alpha = 0.0;
  spec.light = {0.2, 0.5, 0.9};
  auto haze = apply_rain_model(b, spec);
  for (std::int64_t c = 0; c < 3; ++c)
    for (std::int64_t y = 0; y < 32; ++y)
      for (std::int64_t x = 0; x < 32; ++x) CHECK(haze.rainy.at(c, y, x) == static_cast<float>(spec.light[static_cast<std::size_t>(c)]));

  SUBCASE("alpha = 1 is the additive model bit for bit") {
    spec.alpha = 1.0;
    auto r = apply_rain_model(b, spec);
    CHECK(r.rainy == apply_additive_model(b, r.streaks));
    CHECK(in_unit_range(r.rainy));
    CHECK(in_unit_range(r.streaks));
    for (std::int64_t p = 0; p < 32 * 32; ++p) {
      CHECK(r.streaks.data[static_cast<std::size_t>(p)] == r.streaks.data[static_cast<std::size_t>(32 * 32 + p)]);
    }
  }

  SUBCASE("without saturation O - B recovers R up to the rounding of one sum") {
    Image dark = flat(32, 32, 0.1f);
    for (std::size_t i = 0; i < dark.data.size(); ++i) dark.data[i] += 0.1f * static_cast<float>(i % 7) / 7.0f;
    spec.alpha = 1.0;
    for (auto& l : spec.layers) l.intensity = 0.2;
    auto r = apply_rain_model(dark, spec);
    std::size_t exact = 0;
    for (std::size_t i = 0; i < dark.data.size(); ++i) {
      const float o = r.rainy.data[i];
      CHECK(o < 1.0f);
      const float diff = o - dark.data[i];
      exact += diff == r.streaks.data[i];
      // Rounding of B + R, plus rounding of O - B where R > B: each at most
      // half an ulp of O.
      CHECK(std::abs(static_cast<double>(diff) - r.streaks.data[i]) <= static_cast<double>(std::nextafter(o, 2.0f)) - o);
    }
    MESSAGE("O - B == R bit-exactly at " << exact << " of " << dark.data.size() << " values");
  }

  SUBCASE("rain target is the post-clamp difference") {
    spec.alpha = 0.9;
    auto r = apply_rain_model(b, spec);
    Image t = rain_target(r.rainy, b);
    for (std::size_t i = 0; i < t.data.size(); ++i) CHECK(t.data[i] == r.rainy.data[i] - b.data[i]);
  }
}

TEST_CASE("rain spec validation") {
  RainSpec spec;
  spec.layers = {StreakLayer{5, 10, 1, 1, 0.3}, StreakLayer{5, 20, 1, 1, 0.3}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.layers[1].angle_deg = -5;
  CHECK_NOTHROW(spec.validate());
  spec.alpha = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(preset("drizzle"), ConfigError);
  RainDistribution narrow = preset("heavy");
  narrow.angle_deg = {0, 4};
  CHECK_THROWS_AS(narrow.validate(), ConfigError);
}

TEST_CASE("presets draw distinct directions") {
  const auto heavy = preset("heavy");
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    RainSpec s = heavy.sample(rng);
    CHECK_NOTHROW(s.validate());
    CHECK(s.layers.size() >= 2);
    for (std::size_t a = 0; a < s.layers.size(); ++a)
      for (std::size_t b = 0; b < a; ++b) CHECK(std::abs(s.layers[a].angle_deg - s.layers[b].angle_deg) >= heavy.min_angle_gap_deg);
  }
}

TEST_CASE("make_dataset") {
  const auto bgs = backgrounds(4, 32);
  CHECK_THROWS_AS(make_dataset({}, preset("light"), 3, 1), UsageError);
  auto empty = make_dataset(bgs, preset("light"), 0, 1);
  CHECK(empty.samples.empty());
  CHECK(empty.manifest == manifest_header());

  const int saved = thread_count();
  set_thread_count(1);
  auto a = make_dataset(bgs, preset("light"), 6, 11);
  set_thread_count(3);
  auto b = make_dataset(bgs, preset("light"), 6, 11);
  set_thread_count(saved);
  CHECK(a.manifest == b.manifest);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.samples[i].rainy == b.samples[i].rainy);
    CHECK(a.samples[i].streaks == b.samples[i].streaks);
    CHECK(a.samples[i].background == bgs[i % 4]);
    CHECK(in_unit_range(a.samples[i].rainy));
  }
  auto c = make_dataset(bgs, preset("light"), 6, 12);
  CHECK(a.manifest != c.manifest);
  // Extending the count leaves earlier samples untouched.
  auto longer = make_dataset(bgs, preset("light"), 8, 11);
  CHECK(longer.manifest.substr(0, a.manifest.size()) == a.manifest);
}

TEST_CASE("heavy rain degrades more than light rain") {
  const auto bgs = backgrounds(5, 48);
  auto light = make_dataset(bgs, preset("light"), 20, 21);
  auto heavy = make_dataset(bgs, preset("heavy"), 20, 21);
  double pl = 0, ph = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    pl += metrics::psnr(light.samples[i].rainy, light.samples[i].background) / 20;
    ph += metrics::psnr(heavy.samples[i].rainy, heavy.samples[i].background) / 20;
  }
  MESSAGE("mean PSNR(O, B): light " << pl << " dB, heavy " << ph << " dB");
  CHECK(ph < pl);
}

TEST_CASE("png round trip") {
  TempDir dir("png");
  Rng rng(8);
  Image img = Image::zeros(9, 13);
  for (float& v : img.data) v = static_cast<float>(rng.uniform());
  img.data[0] = 0.0f;
  img.data[1] = 1.0f;
  save_image(img, dir / "a.png");
  Image back = load_image(dir / "a.png");
  CHECK(back.height == 9);
  CHECK(back.width == 13);
  for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(std::abs(back.data[i] - img.data[i]) <= 1.0f / 510 + 1e-7f);
  CHECK(quantize(0.0f) == 0);
  CHECK(quantize(1.0f) == 255);
  CHECK(back.data[0] == 0.0f);
  CHECK(back.data[1] == 1.0f);

  Image checker = Image::zeros(8, 8);
  for (std::int64_t y = 0; y < 8; ++y)
    for (std::int64_t x = 0; x < 8; ++x)
      for (std::int64_t c = 0; c < 3; ++c) checker.at(c, y, x) = ((x + y) % 2) ? 0.7f : 0.2f;
  save_image(checker, dir / "c1.png");
  Image once = load_image(dir / "c1.png");
  save_image(once, dir / "c2.png");
  CHECK(load_image(dir / "c2.png") == once);
  CHECK(testing::read_file(dir / "c1.png") == testing::read_file(dir / "c2.png"));

  CHECK_THROWS_AS(load_image(dir / "missing.png"), IoError);
  std::ofstream(dir / "junk.png") << "not a png";
  CHECK_THROWS_AS(load_image(dir / "junk.png"), IoError);

  // Grayscale files are rejected with the path in the message.
  png_image gray{};
  gray.version = PNG_IMAGE_VERSION;
  gray.width = gray.height = 4;
  gray.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(16, 128);
  REQUIRE(png_image_write_to_file(&gray, (dir / "gray.png").c_str(), 0, pixels.data(), 0, nullptr));
  try {
    load_image(dir / "gray.png");
    FAIL("grayscale accepted");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("gray.png") != std::string::npos);
  }
}

TEST_CASE("dataset directory layout") {
  TempDir d1("ds1"), d2("ds2");
  auto ds = make_dataset(backgrounds(3, 24), preset("heavy"), 4, 5);
  save_dataset(ds, d1.path());
  save_dataset(make_dataset(backgrounds(3, 24), preset("heavy"), 4, 5), d2.path());
  for (const char* f : {"manifest.txt", "rain/00000.png", "norain/00003.png", "streaks/00002.png"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(d1 / f));
    CHECK(testing::read_file(d1 / f) == testing::read_file(d2 / f));
  }
  auto pairs = load_pairs(d1.path());
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[2].id == "00002");
  for (std::size_t i = 0; i < 4; ++i) CHECK(pairs[i].rainy == load_image(d1 / ("rain/" + pairs[i].id + ".png")));

  std::filesystem::remove(d1 / "norain/00001.png");
  CHECK_THROWS_AS(load_pairs(d1.path()), IoError);
  CHECK_THROWS_AS(load_pairs(d1 / "nowhere"), IoError);
}
