// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails. Criteria can be selected by name: `acceptance AC2 AC7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "drd/analysis/analysis.hpp"
#include "drd/cli/cli.hpp"
#include "drd/core/parallel.hpp"
#include "drd/metrics/quality.hpp"
#include "drd/training/trainer.hpp"
#include "support/affine.hpp"
#include "support/oracles.hpp"
#include "support/quality_oracles.hpp"
#include "support/tempdir.hpp"

using namespace drd;
using drd::testing::grad_check;
using drd::testing::random_tensor;
using drd::testing::read_file;
using drd::testing::TempDir;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGradTol = 1e-3;
constexpr int kGradSeeds = 5;
constexpr double kGradBudgetSec = 120.0;
constexpr double kPsnrTol = 1e-6;  // dB
constexpr double kSsimTol = 1e-6;
constexpr int kMetricPairs = 20;
constexpr double kLossRatio = 0.5;
constexpr double kPsnrGainDb = 2.0;
constexpr double kToyBudgetSec = 15 * 60.0;

struct Outcome {
  bool pass = true;
  std::vector<std::string> failures;
  std::string summary;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult drd_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "drd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// ---- AC1

Outcome ac1_gradients() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int checks = 0;
  auto record = [&](const std::string& name, std::uint64_t seed, double err) {
    worst = std::max(worst, err);
    ++checks;
    o.check(err <= kGradTol, fmt("%s seed %llu: %.3g", name.c_str(), static_cast<unsigned long long>(seed), err));
  };
  using F = std::function<Tensor()>;
  auto op = [&](const std::string& name, std::uint64_t seed, const F& f, std::vector<Tensor> wrt, Rng& rng) {
    record(name, seed, grad_check(f, std::move(wrt), rng).relative_error);
  };

  for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
    Rng rng(1000 + seed);
    Tensor x = random_tensor({2, 3, 7, 7}, rng, -1, 1, true);
    Tensor w = random_tensor({4, 3, 3, 3}, rng, -1, 1, true);
    Tensor b = random_tensor({1, 4, 1, 1}, rng, -1, 1, true);
    Tensor w1 = random_tensor({2, 3, 1, 1}, rng, -1, 1, true);
    op("conv2d d2", seed, [&] { return ops::conv2d(x, w, b, {1, 2, 2}); }, {x, w, b}, rng);
    op("conv2d s2", seed, [&] { return ops::conv2d(x, w, b, {2, 1, 1}); }, {x, w, b}, rng);
    op("conv2d 1x1", seed, [&] { return ops::conv2d(x, w1, Tensor{}, {}); }, {x, w1}, rng);

    Tensor xb = random_tensor({2, 4, 5, 5}, rng, -2, 2, true);
    Tensor g = random_tensor({1, 4, 1, 1}, rng, 0.5, 1.5, true);
    Tensor be = random_tensor({1, 4, 1, 1}, rng, -1, 1, true);
    ops::RunningStats rs{Tensor::zeros({1, 4, 1, 1}), Tensor::full({1, 4, 1, 1}, 1.0f)};
    op("batch_norm train", seed, [&] { return ops::batch_norm(xb, g, be, rs, true); }, {xb, g, be}, rng);
    op("batch_norm eval", seed, [&] { return ops::batch_norm(xb, g, be, rs, false); }, {xb, g, be}, rng);

    Tensor xa = random_tensor({2, 4, 4, 4}, rng, -2, 2, true);
    Tensor al = random_tensor({1, 4, 1, 1}, rng, 0.1, 0.4, true);
    op("prelu", seed, [&] { return ops::prelu(xa, al); }, {xa, al}, rng);
    op("relu", seed, [&] { return ops::relu(xa); }, {xa}, rng);
    op("sigmoid", seed, [&] { return ops::sigmoid(xa); }, {xa}, rng);

    Tensor xp = random_tensor({2, 4, 5, 3}, rng, -1, 1, true);
    op("global_avg_pool", seed, [&] { return ops::global_avg_pool(xp); }, {xp}, rng);
    Tensor v = random_tensor({3, 6, 1, 1}, rng, -1, 1, true);
    Tensor fw = random_tensor({4, 6, 1, 1}, rng, -1, 1, true);
    Tensor fb = random_tensor({1, 4, 1, 1}, rng, -1, 1, true);
    op("fully_connected", seed, [&] { return ops::fully_connected(v, fw, fb); }, {v, fw, fb}, rng);

    Tensor e1 = random_tensor({2, 3, 4, 4}, rng, -1, 1, true);
    Tensor e2 = random_tensor({2, 3, 4, 4}, rng, -1, 1, true);
    Tensor gate = random_tensor({2, 3, 1, 1}, rng, -1, 1, true);
    op("add", seed, [&] { return ops::add(e1, e2); }, {e1, e2}, rng);
    op("sub broadcast", seed, [&] { return ops::sub(e1, gate); }, {e1, gate}, rng);
    op("mul broadcast", seed, [&] { return ops::mul(e1, gate); }, {e1, gate}, rng);
    op("scale", seed, [&] { return ops::scale(e1, -0.7f); }, {e1}, rng);

    Tensor c1 = random_tensor({2, 2, 3, 3}, rng, -1, 1, true);
    Tensor c2 = random_tensor({2, 3, 3, 3}, rng, -1, 1, true);
    op("concat+slice", seed,
       [&] {
         Tensor parts[] = {c1, c2};
         return ops::slice_channels(ops::concat_channels(parts), 1, 3);
       },
       {c1, c2}, rng);
    op("squared_error_sum", seed, [&] { return ops::squared_error_sum(c1, ops::scale(c1, 0.5f)); }, {c1}, rng);
    op("sum", seed, [&] { return ops::sum(c2); }, {c2}, rng);
    Tensor s1 = random_tensor({1, 1, 1, 1}, rng, 0.5, 1, true);
    Tensor s2 = random_tensor({1, 1, 1, 1}, rng, 0.5, 1, true);
    op("linear_combination", seed,
       [&] {
         Tensor t[] = {s1, ops::mul(s2, s2)};
         double wts[] = {0.7, 1.0};
         return ops::linear_combination(t, wts);
       },
       {s1, s2}, rng);
  }

  // Whole blocks, judged as one gradient vector: biases feeding a batch norm
  // have a true gradient of exactly zero.
  auto block = [&](const std::string& name, auto make, std::uint64_t base) {
    for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
      Rng rng(base + seed);
      auto m = make();
      m->reset_parameters(rng);
      drd::testing::randomize_affine(*m, rng);
      Tensor x = random_tensor({2, 4, 8, 8}, rng, -1, 1, true);
      std::vector<Tensor> wrt;
      for (auto& p : nn::named_parameters(*m)) wrt.push_back(p.value);
      wrt.push_back(x);
      record(name, seed, grad_check([&] { return m->forward(x); }, wrt, rng).global_relative_error);
    }
  };
  block("RRB", [] { return std::make_unique<nn::RainResidualBlock>(4, 2); }, 2000);
  block("DCCL", [] { return std::make_unique<nn::DCCL>(4, std::vector<int>{1, 3, 5}); }, 3000);
  block("SDCAB", [] { return std::make_unique<nn::SDCAB>(4, std::vector<int>{1, 3, 5}); }, 4000);

  // End-to-end combined loss on a 2x3x16x16 input.
  const metrics::LossConfig loss_cfg;
  for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
    Rng rng(5000 + seed);
    net::NetworkConfig cfg;
    cfg.feature_maps = 8;
    cfg.blocks_per_branch = 2;
    cfg.se_reduction = 4;
    net::DRDNet model(cfg);
    model.initialize(rng.next_u64());
    drd::testing::randomize_affine(model, rng);
    Tensor in = random_tensor({2, 3, 16, 16}, rng, 0, 1);
    Tensor r_gt = random_tensor({2, 3, 16, 16}, rng, 0, 0.3);
    Tensor b_gt = random_tensor({2, 3, 16, 16}, rng, 0, 1);
    auto loss = [&] {
      auto out = model.forward(in);
      return metrics::loss_total(metrics::loss_rain(out.rain, r_gt),
                                 metrics::loss_detail(out.preliminary, out.detail, b_gt), loss_cfg);
    };
    auto objective = [&] {
      auto out = model.forward(in);
      double rain = 0.0, detail = 0.0;
      for (std::size_t i = 0; i < in.data().size(); ++i) {
        const double dr = static_cast<double>(out.rain.data()[i]) - r_gt.data()[i];
        const double dd = static_cast<double>(in.data()[i]) - out.rain.data()[i] + out.detail.data()[i] -
                          b_gt.data()[i];
        rain += dr * dr;
        detail += dd * dd;
      }
      return (loss_cfg.lambda1 * rain + loss_cfg.lambda2 * detail) / 2.0;
    };
    std::vector<Tensor> params;
    for (auto& p : nn::named_parameters(model)) params.push_back(p.value);
    record("Loss_total", seed, drd::testing::grad_check_objective(loss, objective, params, rng, 0.01).relative_error);
  }

  const double secs = seconds_since(t0);
  o.check(secs < kGradBudgetSec, fmt("runtime %.1f s over %.0f s", secs, kGradBudgetSec));
  o.summary = fmt("gradient suite: %d checks over %d seeds, worst relative error %.2e (tol %.0e), %.1f s (limit %.0f s)",
                  checks, kGradSeeds, worst, kGradTol, secs, kGradBudgetSec);
  return o;
}

// ---- AC2

Outcome ac2_receptive_field() {
  Outcome o;
  const net::NetworkConfig cfg;
  const auto rep = analysis::detail_repair_report(cfg);
  o.check(rep.rows.size() == 19, "expected 19 layers");
  bool formula_ok = *rep.rows[0].table_formula == 3;
  for (std::int64_t d = 1; d <= 16; ++d)
    formula_ok = formula_ok && *rep.rows[static_cast<std::size_t>(d)].table_formula == (d - 1) * 14 + 17;
  formula_ok = formula_ok && *rep.rows[16].table_formula == 227 && *rep.rows[17].table_formula == 229 &&
               *rep.rows[18].table_formula == 231;
  o.check(formula_ok, "formula column differs from (d-1)*14+17 / 227 / 229 / 231");

  const auto& last = rep.rows.back();
  o.check(last.receptive_field != *last.table_formula, "computed column equals the formula column");

  const auto cli = drd_cli({"analyze-rf"});
  o.check(cli.code == 0, "analyze-rf exit code " + std::to_string(cli.code));
  o.check(cli.out.find("227x227   229x229   231x231") != std::string::npos, "analyze-rf formula row lacks 227/229/231");
  o.check(cli.out.find("computed " + std::to_string(last.receptive_field) + "x") != std::string::npos,
          "analyze-rf lacks the computed value");

  // Impulse support of one and two stacked SDCABs at full width.
  std::vector<std::int64_t> measured, predicted;
  for (std::int64_t n : {1, 2}) {
    net::NetworkConfig c = cfg;
    c.blocks_per_branch = n;
    net::DetailRepairNetwork drn(c);
    nn::fill_probe(drn, 1.0f);
    drn.set_training(false);
    std::vector<analysis::Stage> stages;
    for (auto& b : drn.blocks) stages.push_back([blk = b.get()](const Tensor& x) { return blk->forward(x); });
    auto chain = analysis::detail_repair_chain(c);
    const std::vector<analysis::LayerDescriptor> blocks(chain.begin() + 1, chain.begin() + 1 + n);
    const auto want = analysis::receptive_field(blocks).rows.back().receptive_field;
    const std::int64_t side = 2 * want + 1;
    const auto box = analysis::impulse_response_support(stages, c.feature_maps, side, side, side / 2, side / 2);
    measured.push_back(box.height());
    predicted.push_back(want);
    o.check(box.height() == want && box.width() == want,
            fmt("%lld SDCAB(s): support %lldx%lld, calculator %lld", static_cast<long long>(n),
                static_cast<long long>(box.height()), static_cast<long long>(box.width()), static_cast<long long>(want)));
  }
  o.summary = fmt("receptive field: formula column 3,17..227,229,231 %s; computed final %lld != formula %lld; "
                  "impulse support 1/2 SDCABs %lld/%lld vs calculator %lld/%lld",
                  formula_ok ? "exact" : "WRONG", static_cast<long long>(last.receptive_field),
                  static_cast<long long>(*last.table_formula), static_cast<long long>(measured[0]),
                  static_cast<long long>(measured[1]), static_cast<long long>(predicted[0]),
                  static_cast<long long>(predicted[1]));
  return o;
}

// ---- AC3

std::int64_t ulp_distance(float a, float b) {
  std::int32_t ia, ib;
  std::memcpy(&ia, &a, 4);
  std::memcpy(&ib, &b, 4);
  if (ia < 0) ia = std::numeric_limits<std::int32_t>::min() - ia;
  if (ib < 0) ib = std::numeric_limits<std::int32_t>::min() - ib;
  return std::abs(static_cast<std::int64_t>(ia) - ib);
}

Outcome ac3_identity() {
  Outcome o;
  NoGradGuard guard;
  // Zero output convolutions: I_c == O bit for bit.
  std::size_t identity_elems = 0;
  for (bool detail : {true, false}) {
    net::NetworkConfig cfg;
    cfg.detail_branch = detail;
    net::DRDNet model(cfg);
    model.initialize(detail ? 31 : 32);
    model.zero_output_layers();
    for (bool train : {false, true}) {
      model.set_training(train);
      Rng rng(33);
      Tensor x = random_tensor({2, 3, 17, 23}, rng, 0, 1);
      const auto y = model.forward(x);
      const bool same = std::memcmp(y.composed.data().data(), x.data().data(), x.data().size() * 4) == 0;
      identity_elems += x.data().size();
      o.check(same, fmt("zeroed heads (detail=%d, train=%d): I_c != O", detail, train));
    }
  }

  // I_p + R == O for arbitrary parameters.
  std::size_t total = 0, exact = 0;
  std::int64_t max_ulp = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    net::NetworkConfig cfg;
    cfg.feature_maps = 16;
    cfg.blocks_per_branch = 4;
    net::DRDNet model(cfg);
    Rng rng(3000 + seed);
    model.initialize(rng.next_u64());
    drd::testing::randomize_affine(model, rng);
    Tensor x = random_tensor({2, 3, 24, 24}, rng, 0, 1);
    const auto y = model.forward(x);
    const Tensor recomposed = ops::add(y.preliminary, y.rain);
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      ++total;
      const std::int64_t d = ulp_distance(recomposed.data()[i], x.data()[i]);
      exact += d == 0;
      max_ulp = std::max(max_ulp, d);
    }
  }
  o.check(exact == total, fmt("I_p + R != O in %zu of %zu elements (max %lld ulp)", total - exact, total,
                              static_cast<long long>(max_ulp)));
  o.summary = fmt("identity composition: zeroed heads I_c == O on %zu elements; I_p + R == O exactly on %zu/%zu "
                  "elements, max deviation %lld ulp",
                  identity_elems, exact, total, static_cast<long long>(max_ulp));
  return o;
}

// ---- AC4

struct ToyRun {
  double first_loss = 0, last_loss = 0, psnr_out = 0, psnr_in = 0, seconds = 0;
};

ToyRun toy_run(const TempDir& dir, const fs::path& ds, bool detail) {
  const std::string tag = detail ? "full" : "rain_only";
  const fs::path ckpt = dir / (tag + ".ckpt");
  write_file(dir / (tag + ".cfg"),
             "epochs = 1\niterations_per_epoch = 200\nbatch_size = 4\nlr0 = 0.01\ncrop_size = 64\n"
             "lambda1 = 0.1\nlambda2 = 1.0\nfeature_maps = 16\nblocks_per_branch = 8\nseed = 1\n"
             "detail_branch = " + std::string(detail ? "true" : "false") + "\n");
  const auto t0 = std::chrono::steady_clock::now();
  const auto train = drd_cli({"train", "--data", ds.string(), "--out", ckpt.string(), "--config",
                              (dir / (tag + ".cfg")).string()});
  ToyRun r;
  r.seconds = seconds_since(t0);
  if (train.code != 0) throw std::runtime_error(tag + " training failed: " + train.err);
  training::StepRecord rec;
  std::istringstream trace(read_file(ckpt.string() + ".trace"));
  std::string line;
  while (std::getline(trace, line)) {
    long long it;
    double lr, total;
    std::sscanf(line.c_str(), "%lld %lf %lf", &it, &lr, &total);
    if (it == 1) r.first_loss = total;
    r.last_loss = total;
  }

  const auto derain = drd_cli({"derain", "--ckpt", ckpt.string(), "--in", (ds / "rain").string(), "--out",
                               (dir / (tag + "_out")).string()});
  if (derain.code != 0) throw std::runtime_error(tag + " derain failed: " + derain.err);
  const auto out_eval = drd_cli({"eval", "--pred", (dir / (tag + "_out")).string(), "--ref", (ds / "norain").string(),
                                 "--out", (dir / (tag + "_eval.txt")).string()});
  const auto in_eval = drd_cli({"eval", "--pairs", ds.string(), "--out", (dir / "rainy_eval.txt").string()});
  if (out_eval.code != 0 || in_eval.code != 0) throw std::runtime_error("eval failed");
  auto mean_psnr = [](const std::string& text) {
    return std::stod(text.substr(text.find("mean_psnr = ") + 12));
  };
  r.psnr_out = mean_psnr(out_eval.out);
  r.psnr_in = mean_psnr(in_eval.out);
  return r;
}

Outcome ac4_toy_training() {
  Outcome o;
  set_thread_count(1);
  TempDir dir("acceptance-toy");
  const fs::path ds = dir / "toy";
  const auto synth = drd_cli({"synth", "--procedural", "64x64", "--count", "8", "--preset", "light", "--seed", "7",
                              "--out", ds.string()});
  if (synth.code != 0) throw std::runtime_error("synth failed: " + synth.err);

  const ToyRun full = toy_run(dir, ds, true);
  const ToyRun rain_only = toy_run(dir, ds, false);
  const double ratio = full.last_loss / full.first_loss;
  const double secs = full.seconds + rain_only.seconds;
  o.check(ratio <= kLossRatio, fmt("(a) loss ratio %.3f > %.2f", ratio, kLossRatio));
  o.check(full.psnr_out >= full.psnr_in + kPsnrGainDb,
          fmt("(b) PSNR(I_c,B) %.2f < PSNR(O,B) %.2f + %.0f", full.psnr_out, full.psnr_in, kPsnrGainDb));
  o.check(rain_only.psnr_out <= full.psnr_out,
          fmt("(c) rain-only PSNR(I_p,B) %.2f > full PSNR(I_c,B) %.2f", rain_only.psnr_out, full.psnr_out));
  o.check(secs < kToyBudgetSec, fmt("runtime %.0f s over %.0f s", secs, kToyBudgetSec));
  o.summary = fmt("toy training: (a) loss %.4g -> %.4g, ratio %.3f (<= %.2f); (b) PSNR O %.2f dB, I_c %.2f dB "
                  "(need +%.0f); (c) rain-only I_p %.2f dB vs full %.2f dB; %.0f s (limit %.0f s)",
                  full.first_loss, full.last_loss, ratio, kLossRatio, full.psnr_in, full.psnr_out, kPsnrGainDb,
                  rain_only.psnr_out, full.psnr_out, secs, kToyBudgetSec);
  return o;
}

// ---- AC5

Outcome ac5_metric_oracles() {
  Outcome o;
  namespace q = drd::testing::quality;
  Rng rng(55);
  double worst_psnr = 0, worst_ssim = 0;
  for (int i = 0; i < kMetricPairs; ++i) {
    const Image a = q::random_image(rng, 32, 32), b = q::random_image(rng, 32, 32);
    worst_psnr = std::max(worst_psnr, std::fabs(metrics::psnr(a, b) - q::psnr_oracle(a, b)));
    worst_ssim = std::max(worst_ssim, std::fabs(metrics::ssim(a, b) - q::ssim_oracle(a, b)));
  }
  o.check(worst_psnr <= kPsnrTol, fmt("PSNR deviation %.3g dB", worst_psnr));
  o.check(worst_ssim <= kSsimTol, fmt("SSIM deviation %.3g", worst_ssim));
  const Image a = q::random_image(rng, 32, 32);
  const double same_psnr = metrics::psnr(a, a), same_ssim = metrics::ssim(a, a);
  o.check(same_psnr == 99.0, fmt("psnr(a,a) = %.17g", same_psnr));
  o.check(same_ssim == 1.0, fmt("ssim(a,a) = %.17g", same_ssim));
  o.summary = fmt("metric oracles: %d pairs 32x32, max |PSNR - oracle| %.2e dB (tol %.0e), max |SSIM - oracle| %.2e "
                  "(tol %.0e); identical images %.0f dB / %.17g",
                  kMetricPairs, worst_psnr, kPsnrTol, worst_ssim, kSsimTol, same_psnr, same_ssim);
  return o;
}

// ---- AC6

Outcome ac6_determinism() {
  Outcome o;
  TempDir dir("acceptance-det");
  for (const char* d : {"a", "b"})
    o.check(drd_cli({"synth", "--procedural", "20x24", "--count", "4", "--preset", "heavy", "--seed", "21", "--out",
                     (dir / d).string()})
                    .code == 0,
            "synth failed");
  o.check(read_file(dir / "a" / "manifest.txt") == read_file(dir / "b" / "manifest.txt"), "manifests differ");
  o.check(read_file(dir / "a" / "rain" / "00002.png") == read_file(dir / "b" / "rain" / "00002.png"),
          "dataset PNGs differ");

  write_file(dir / "t.cfg",
             "epochs = 2\niterations_per_epoch = 3\nbatch_size = 2\ncrop_size = 16\nfeature_maps = 4\n"
             "blocks_per_branch = 1\nse_reduction = 2\nseed = 4\n");
  const std::string data = (dir / "a").string(), cfg = (dir / "t.cfg").string();
  for (const char* c : {"x.ckpt", "y.ckpt"})
    o.check(drd_cli({"train", "--data", data, "--out", (dir / c).string(), "--config", cfg}).code == 0, "train failed");
  o.check(read_file(dir / "x.ckpt.trace") == read_file(dir / "y.ckpt.trace"), "traces differ");
  o.check(read_file(dir / "x.ckpt") == read_file(dir / "y.ckpt"), "checkpoints differ");

  for (const char* d : {"ox", "oy"})
    o.check(drd_cli({"derain", "--ckpt", (dir / "x.ckpt").string(), "--in", (dir / "a" / "rain").string(), "--out",
                     (dir / d).string(), "--dump-intermediates"})
                    .code == 0,
            "derain failed");
  bool pngs_same = true;
  for (const auto& p : rain::list_pngs(dir / "ox")) pngs_same = pngs_same && read_file(p) == read_file(dir / "oy" / p.filename());
  o.check(pngs_same, "derain PNGs differ");

  const std::string bytes = read_file(dir / "x.ckpt");
  const auto ck = training::load_checkpoint(dir / "x.ckpt");
  o.check(training::serialize(ck) == bytes, "serialize(load(ckpt)) != ckpt bytes");
  training::save_checkpoint(ck, dir / "copy.ckpt");
  o.check(read_file(dir / "copy.ckpt") == bytes, "save(load(ckpt)) != ckpt bytes");

  o.check(drd_cli({"train", "--data", data, "--out", (dir / "r.ckpt").string(), "--config", cfg, "--stop-after", "2"})
                  .code == 0,
          "interrupted train failed");
  o.check(drd_cli({"train", "--data", data, "--out", (dir / "r.ckpt").string(), "--resume", (dir / "r.ckpt").string()})
                  .code == 0,
          "resume failed");
  o.check(read_file(dir / "r.ckpt.trace") == read_file(dir / "x.ckpt.trace"), "resumed trace differs");
  o.check(read_file(dir / "r.ckpt") == read_file(dir / "x.ckpt"), "resumed checkpoint differs");
  o.summary = "determinism: manifests, dataset and derain PNGs, traces and checkpoints byte-identical; checkpoint "
              "round trip byte-identical; resume after 2 of 6 iterations equals the uninterrupted run";
  return o;
}

// ---- AC7

Outcome ac7_schedule() {
  Outcome o;
  const training::TrainConfig cfg;
  const double e0 = training::lr_schedule(0, cfg), e15 = training::lr_schedule(15, cfg),
               e44 = training::lr_schedule(44, cfg);
  o.check(e0 == 0.01 && e15 == 0.005 && e44 == 0.0025, fmt("lr %.17g %.17g %.17g", e0, e15, e44));

  // The trainer applies the same values at epoch boundaries.
  training::TrainConfig tiny;
  tiny.epochs = 45;
  tiny.iterations_per_epoch = 1;
  tiny.batch_size = 1;
  tiny.crop_size = 12;
  tiny.net.feature_maps = 2;
  tiny.net.blocks_per_branch = 1;
  tiny.net.se_reduction = 1;
  std::vector<rain::Pair> data;
  Rng rng(7);
  Image bg = rain::procedural_background(12, 12, rng);
  data.push_back({"0", bg, bg});
  training::Trainer trainer(tiny, data);
  std::vector<double> seen;
  while (!trainer.done()) seen.push_back(trainer.step().lr);
  o.check(seen[0] == 0.01 && seen[15] == 0.005 && seen[44] == 0.0025 && seen[14] == 0.01 && seen[29] == 0.005,
          "trainer lr at epochs 0/14/15/29/44 wrong");
  o.summary = fmt("schedule: lr at epochs 0/15/44 = %g/%g/%g, trainer steps agree", e0, e15, e44);
  return o;
}

// ---- AC8

Outcome ac8_se() {
  Outcome o;
  NoGradGuard guard;
  float lo = 1.0f, hi = 0.0f;
  std::size_t gates = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(8000 + seed);
    nn::SEUnit se(16, 4);
    se.reset_parameters(rng);
    const double scale = seed < 10 ? 1.0 : 1e3;  // the second half drives the sigmoid deep into saturation
    for (Tensor t : {se.fc1.weight, se.fc2.weight, se.fc2.bias})
      for (float& v : t.data()) v = static_cast<float>(v * scale);
    Tensor x = random_tensor({2, 16, 5, 5}, rng, -10, 10);
    const auto y = se.forward(x);
    for (float g : y.gate.data()) {
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      ++gates;
    }
  }
  o.check(lo > 0.0f && hi < 1.0f, fmt("gate range [%.9g, %.9g]", lo, hi));

  nn::SEUnit zero(16, 4);
  for (Tensor t : {zero.fc1.weight, zero.fc1.bias, zero.fc2.weight, zero.fc2.bias})
    for (float& v : t.data()) v = 0.0f;
  Rng rng(88);
  bool all_half = true;
  const auto half = zero.forward(random_tensor({2, 16, 5, 5}, rng, -3, 3));
  for (float g : half.gate.data()) all_half = all_half && g == 0.5f;
  o.check(all_half, "zero-weight SE gates are not all 0.5");

  net::NetworkConfig cfg;
  cfg.feature_maps = 16;
  cfg.blocks_per_branch = 3;
  cfg.se_reduction = 4;
  net::DRDNet model(cfg);
  model.initialize(9);
  Image img = rain::procedural_background(24, 24, rng);
  const auto r1 = analysis::se_gate_report(model, img, 1, 4), r2 = analysis::se_gate_report(model, img, 1, 4);
  o.check(r1.top == r2.top && r1.bottom == r2.bottom && r1.gates == r2.gates, "report not deterministic");
  o.check(r1.top.size() == 4 && r1.top_maps.size() == 4 && r1.bottom_maps.size() == 4, "top-k/bottom-k sizes");
  o.check(r1.gates[static_cast<std::size_t>(r1.top[0])] >= r1.gates[static_cast<std::size_t>(r1.bottom[0])],
          "top gate below bottom gate");

  auto& se = model.rrn.blocks[1]->se;
  for (Tensor t : {se.fc1.weight, se.fc1.bias, se.fc2.weight, se.fc2.bias})
    for (float& v : t.data()) v = 0.0f;
  const auto tie = analysis::se_gate_report(model, img, 1, 3);
  o.check(tie.top == std::vector<std::int64_t>{0, 1, 2} && tie.bottom == std::vector<std::int64_t>{0, 1, 2},
          "ties not broken by ascending channel index");

  TempDir dir("acceptance-se");
  training::Checkpoint ck;
  ck.config.net = cfg;
  ck.tensors = training::capture_state(model);
  training::save_checkpoint(ck, dir / "m.ckpt");
  save_image(img, dir / "img.png");
  const auto cli = drd_cli({"inspect-se", "--ckpt", (dir / "m.ckpt").string(), "--image", (dir / "img.png").string(),
                            "--block", "1", "--topk", "40", "--out", (dir / "maps").string()});
  o.check(cli.code == 0 && cli.err.find("warning") != std::string::npos, "inspect-se clamp warning missing");
  o.check(cli.out.find("top = 0,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15\n") != std::string::npos, "inspect-se tie order");

  o.summary = fmt("SE: %zu gates within [%.3g, %.9g], zero-weight gates 0.5, top-k/bottom-k report deterministic "
                  "with index-order ties, --topk clamped with a warning",
                  gates, lo, hi);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", ac1_gradients},    {"AC2", ac2_receptive_field}, {"AC3", ac3_identity}, {"AC4", ac4_toy_training},
      {"AC5", ac5_metric_oracles}, {"AC6", ac6_determinism},   {"AC7", ac7_schedule}, {"AC8", ac8_se}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    std::printf("%s %s  %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.summary.c_str());
    for (const auto& f : o.failures) std::printf("    failed: %s\n", f.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
