#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "drd/analysis/analysis.hpp"
#include "drd/cli/cli.hpp"
#include "drd/core/error.hpp"
#include "drd/core/keyvalue.hpp"
#include "drd/core/parallel.hpp"
#include "drd/metrics/quality.hpp"
#include "drd/rain/synth.hpp"
#include "drd/training/trainer.hpp"

namespace fs = std::filesystem;

namespace drd::cli {

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// ---- synth

const std::vector<std::string> kRainKeys = {
    "layers_min",    "layers_max",    "angle_min",  "angle_max", "angle_gap",   "length_min",
    "length_max",    "width_min",     "width_max",  "density_min", "density_max", "intensity_min",
    "intensity_max", "alpha_min",     "alpha_max",  "light_min", "light_max"};

rain::RainDistribution custom_distribution(const KeyValues& kv) {
  kv.require_known(kRainKeys);
  rain::RainDistribution d = rain::preset("light");
  d.name = "custom";
  d.min_layers = kv.get_int("layers_min", d.min_layers);
  d.max_layers = kv.get_int("layers_max", d.max_layers);
  d.min_angle_gap_deg = kv.get_double("angle_gap", d.min_angle_gap_deg);
  auto range = [&](const std::string& stem, rain::Range& r) {
    r.lo = kv.get_double(stem + "_min", r.lo);
    r.hi = kv.get_double(stem + "_max", r.hi);
  };
  range("angle", d.angle_deg);
  range("length", d.length);
  range("width", d.width);
  range("density", d.density);
  range("intensity", d.intensity);
  range("alpha", d.alpha);
  range("light", d.light);
  d.validate();
  return d;
}

struct SynthArgs {
  std::string backgrounds, procedural, out, preset = "light", rain_config;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  rain::RainDistribution dist;
  if (a.preset == "custom") {
    if (a.rain_config.empty()) throw UsageError("--preset custom needs --rain-config");
    dist = custom_distribution(KeyValues::parse(read_text(a.rain_config), a.rain_config));
  } else {
    if (!a.rain_config.empty()) throw UsageError("--rain-config is only read with --preset custom");
    dist = rain::preset(a.preset);
  }

  std::vector<Image> bgs;
  if (!a.backgrounds.empty()) {
    for (const auto& p : rain::list_pngs(a.backgrounds)) bgs.push_back(load_image(p));
    if (bgs.empty()) throw IoError("no PNG files in " + a.backgrounds);
  } else {
    std::int64_t h = 0, w = 0;
    char tail = 0;
    if (std::sscanf(a.procedural.c_str(), "%" SCNd64 "x%" SCNd64 "%c", &h, &w, &tail) != 2 || h < 1 || w < 1)
      throw UsageError("--procedural expects HxW, got '" + a.procedural + "'");
    const std::size_t n = std::max<std::size_t>(a.count, 1);
    bgs.resize(n);
    parallel_for(n, [&](std::size_t i) {
      Rng rng = Rng::derive(a.seed, "synth.background", i);
      bgs[i] = rain::procedural_background(h, w, rng);
    });
  }

  const rain::Dataset ds = rain::make_dataset(bgs, dist, a.count, a.seed);
  rain::save_dataset(ds, a.out);
  out << "wrote " << ds.samples.size() << " pairs (" << dist.name << ") to " << a.out << "\n";
  return kOk;
}

// ---- train

struct TrainArgs {
  std::string data, out, config, resume, trace;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> epochs, iterations_per_epoch;
  std::int64_t stop_after = -1;
};

// Keeps the lines of an earlier run up to `iteration`.
std::string truncated_trace(const fs::path& path, std::int64_t iteration) {
  if (!fs::exists(path)) return {};
  std::istringstream in(read_text(path));
  std::string line, kept;
  while (std::getline(in, line)) {
    long long it = 0;
    if (std::sscanf(line.c_str(), "%lld", &it) != 1 || it > iteration) break;
    kept += line + "\n";
  }
  return kept;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  std::optional<training::Checkpoint> ck;
  training::TrainConfig cfg;
  if (!a.resume.empty()) {
    if (!a.config.empty() || a.seed || a.iterations_per_epoch)
      throw UsageError("--resume takes its settings from the checkpoint; only --epochs may change");
    ck = training::load_checkpoint(a.resume);
    if (a.epochs) {
      ck->config.epochs = *a.epochs;
      ck->config.validate();
    }
    cfg = ck->config;
  } else {
    if (a.config.empty()) throw UsageError("train needs --config or --resume");
    KeyValues kv = KeyValues::parse(read_text(a.config), a.config);
    if (a.seed) kv.set("seed", std::to_string(*a.seed));
    if (a.epochs) kv.set("epochs", std::to_string(*a.epochs));
    if (a.iterations_per_epoch) kv.set("iterations_per_epoch", std::to_string(*a.iterations_per_epoch));
    cfg = training::from_key_values(kv);
  }

  auto data = rain::load_pairs(a.data);
  training::Trainer trainer = ck ? training::Trainer(*ck, std::move(data)) : training::Trainer(cfg, std::move(data));

  const fs::path trace_path = a.trace.empty() ? fs::path(a.out + ".trace") : fs::path(a.trace);
  write_text(trace_path, ck ? truncated_trace(trace_path, ck->iteration) : std::string());
  std::ofstream trace(trace_path, std::ios::binary | std::ios::app);
  if (!trace) throw IoError("cannot write " + trace_path.string());

  const std::int64_t ipe = cfg.iterations_per_epoch;
  double epoch_sum = 0.0;
  std::int64_t epoch_steps = 0, steps = 0;
  while (!trainer.done() && (a.stop_after < 0 || steps < a.stop_after)) {
    const training::StepRecord r = trainer.step();
    ++steps;
    trace << training::trace_line(r) << std::flush;
    epoch_sum += r.loss_total;
    ++epoch_steps;
    if (cfg.checkpoint_every > 0 && r.iteration % cfg.checkpoint_every == 0)
      training::save_checkpoint(trainer.checkpoint(), a.out);
    if (r.iteration % ipe == 0) {
      out << fmt("epoch %lld/%lld lr %.6g mean_loss %.6g\n", static_cast<long long>(r.iteration / ipe),
                 static_cast<long long>(cfg.epochs), r.lr, epoch_sum / static_cast<double>(epoch_steps));
      epoch_sum = 0.0;
      epoch_steps = 0;
    }
  }
  if (!trace) throw IoError("cannot write " + trace_path.string());
  training::save_checkpoint(trainer.checkpoint(), a.out);
  out << "checkpoint at iteration " << trainer.iteration() << " written to " << a.out << "\n";
  return kOk;
}

// ---- derain

std::unique_ptr<net::DRDNet> load_model(const fs::path& path) {
  const training::Checkpoint ck = training::load_checkpoint(path);
  auto model = std::make_unique<net::DRDNet>(ck.config.net);
  training::restore_state(*model, ck.tensors);
  model->set_training(false);
  return model;
}

// The recovered detail Y - X = I_c - I_p, shown inverted: white where
// nothing was added, darker where the detail branch changed the image most.
Image inverted_detail(const Image& composed, const Image& preliminary) {
  Image img = Image::zeros(composed.height, composed.width, composed.channels);
  float peak = 0.0f;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = std::fabs(composed.data[i] - preliminary.data[i]);
    peak = std::max(peak, img.data[i]);
  }
  for (float& v : img.data) v = peak > 0.0f ? 1.0f - v / peak : 1.0f;
  return img;
}

int cmd_derain(const std::string& ckpt, const std::string& in, const std::string& out_dir, bool dump,
               std::ostream& out) {
  const auto model = load_model(ckpt);
  std::vector<fs::path> inputs;
  if (fs::is_directory(in)) {
    inputs = rain::list_pngs(in);
    if (inputs.empty()) throw IoError("no PNG files in " + in);
  } else {
    inputs.push_back(in);
  }
  fs::create_directories(out_dir);
  NoGradGuard guard;
  for (const auto& p : inputs) {
    const Image o = load_image(p);
    if (o.channels != model->config().image_channels)
      throw CompatibilityError("checkpoint expects " + std::to_string(model->config().image_channels) + " channels");
    const net::DrdOutputs y = model->forward(to_tensor(o));
    const std::string stem = p.stem().string();
    const Image composed = from_tensor(y.composed);
    save_image(composed, fs::path(out_dir) / (stem + ".png"));
    if (dump) {
      const Image preliminary = from_tensor(y.preliminary);
      save_image(from_tensor(y.rain), fs::path(out_dir) / (stem + "_rain.png"));
      save_image(preliminary, fs::path(out_dir) / (stem + "_prelim.png"));
      save_image(inverted_detail(composed, preliminary), fs::path(out_dir) / (stem + "_detail.png"));
    }
  }
  out << "derained " << inputs.size() << " image(s) into " << out_dir << "\n";
  return kOk;
}

// ---- eval

int cmd_eval(std::string pairs, std::string pred, std::string ref, const std::string& report_path,
             std::ostream& out) {
  if (!pairs.empty()) {
    if (!pred.empty() || !ref.empty()) throw UsageError("give either --pairs or --pred with --ref");
    pred = (fs::path(pairs) / "rain").string();
    ref = (fs::path(pairs) / "norain").string();
  } else if (pred.empty() || ref.empty()) {
    throw UsageError("eval needs --pairs, or --pred with --ref");
  }
  const auto pred_files = rain::list_pngs(pred), ref_files = rain::list_pngs(ref);
  std::vector<std::string> pred_names, ref_names;
  for (const auto& p : pred_files) pred_names.push_back(p.filename().string());
  for (const auto& p : ref_files) ref_names.push_back(p.filename().string());
  if (pred_names != ref_names)
    throw UsageError("image sets differ: " + std::to_string(pred_names.size()) + " in " + pred + ", " +
                     std::to_string(ref_names.size()) + " in " + ref);
  if (pred_names.empty()) throw UsageError("no images to evaluate in " + pred);

  std::vector<Image> a(pred_files.size()), b(ref_files.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = load_image(pred_files[i]);
    b[i] = load_image(ref_files[i]);
  }
  const metrics::MetricReport rep = metrics::evaluate(a, b);
  std::string text = "# image psnr_db ssim\n";
  for (std::size_t i = 0; i < a.size(); ++i)
    text += fmt("%s %.6f %.6f\n", pred_files[i].stem().string().c_str(), rep.psnr[i], rep.ssim[i]);
  const std::string summary = fmt("count = %zu\nmean_psnr = %.6f\nmean_ssim = %.6f\n", a.size(), rep.mean_psnr,
                                  rep.mean_ssim);
  write_text(report_path, text + summary);
  out << summary;
  return kOk;
}

// ---- analyze-rf

int cmd_analyze_rf(const std::string& config, bool verify, std::ostream& out) {
  training::TrainConfig cfg;
  if (!config.empty()) cfg = training::from_key_values(KeyValues::parse(read_text(config), config));
  const auto rep = analysis::detail_repair_report(cfg.net);
  out << rep.table();
  const auto& last = rep.rows.back();
  out << fmt("detail branch: computed %lldx%lld, formula %lldx%lld\n", static_cast<long long>(last.receptive_field),
             static_cast<long long>(last.receptive_field), static_cast<long long>(*last.table_formula),
             static_cast<long long>(*last.table_formula));
  const auto rain_rf = analysis::receptive_field(analysis::rain_residual_chain(cfg.net)).rows.back().receptive_field;
  out << fmt("rain branch: computed %lldx%lld\n", static_cast<long long>(rain_rf), static_cast<long long>(rain_rf));
  if (!verify) return kOk;

  // The support does not depend on the width, so a single feature map keeps
  // the probe cheap.
  net::NetworkConfig probe_cfg = cfg.net;
  probe_cfg.feature_maps = 1;
  probe_cfg.se_reduction = 1;
  net::DetailRepairNetwork drn(probe_cfg);
  nn::fill_probe(drn, 1.0f);
  drn.set_training(false);
  const std::int64_t side = last.receptive_field + 8, c = side / 2;
  const auto box =
      analysis::impulse_response_support(analysis::detail_repair_stages(drn), probe_cfg.image_channels, side, side, c, c);
  out << fmt("impulse support: %lldx%lld\n", static_cast<long long>(box.height()), static_cast<long long>(box.width()));
  if (box.height() != last.receptive_field || box.width() != last.receptive_field)
    throw NumericError("impulse support disagrees with the computed receptive field");
  return kOk;
}

// ---- inspect-se

int cmd_inspect_se(const std::string& ckpt, const std::string& image, std::int64_t block, std::int64_t top_k,
                   const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto model = load_model(ckpt);
  const auto rep = analysis::se_gate_report(*model, load_image(image), block, top_k);
  if (rep.clamped)
    err << "warning: --topk " << top_k << " exceeds " << rep.gates.size() << " channels, using " << rep.top.size()
        << "\n";
  auto list = [](const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  std::string gates;
  for (std::size_t i = 0; i < rep.gates.size(); ++i) gates += (i ? "," : "") + fmt("%.9g", rep.gates[i]);
  out << "block = " << rep.block << "\nchannels = " << rep.gates.size() << "\ngates = " << gates
      << "\ntop = " << list(rep.top) << "\nbottom = " << list(rep.bottom) << "\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < rep.top.size(); ++i) {
      save_image(rep.top_maps[i], fs::path(out_dir) / fmt("top%zu_ch%lld.png", i + 1, static_cast<long long>(rep.top[i])));
      save_image(rep.bottom_maps[i],
                 fs::path(out_dir) / fmt("bottom%zu_ch%lld.png", i + 1, static_cast<long long>(rep.bottom[i])));
    }
  }
  return kOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return kUsage;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
  if (dynamic_cast<const CompatibilityError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return kCompatibility;
  return kFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DRD-Net deraining: synthesis, training, inference and analysis", "drd"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Render a synthetic rain dataset");
  auto* bg_opt = synth->add_option("--backgrounds", sa.backgrounds, "Directory of clean PNG backgrounds");
  synth->add_option("--procedural", sa.procedural, "Generate one HxW background per sample instead")
      ->excludes(bg_opt);
  synth->add_option("--out", sa.out, "Dataset directory")->required();
  synth->add_option("--preset", sa.preset, "Rain distribution")
      ->check(CLI::IsMember({"light", "heavy", "custom"}));
  synth->add_option("--rain-config", sa.rain_config, "key = value ranges for --preset custom");
  synth->add_option("--count", sa.count, "Number of pairs")->required();
  synth->add_option("--seed", sa.seed, "Root seed");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train from a dataset directory");
  train->add_option("--data", ta.data, "Dataset directory with rain/ and norain/")->required();
  train->add_option("--out", ta.out, "Checkpoint path")->required();
  train->add_option("--config", ta.config, "Training config (key = value)");
  train->add_option("--resume", ta.resume, "Continue from this checkpoint");
  train->add_option("--trace", ta.trace, "Loss trace file (default: <out>.trace)");
  train->add_option("--seed", ta.seed, "Overrides the config seed");
  train->add_option("--epochs", ta.epochs, "Overrides the config epochs");
  train->add_option("--iterations-per-epoch", ta.iterations_per_epoch, "Overrides the config value");
  train->add_option("--stop-after", ta.stop_after, "Stop after this many iterations in this invocation");

  std::string ckpt, in, out_dir;
  bool dump = false;
  auto* derain = app.add_subcommand("derain", "Derain one PNG or a directory of PNGs");
  derain->add_option("--ckpt", ckpt, "Checkpoint")->required();
  derain->add_option("--in", in, "PNG file or directory")->required();
  derain->add_option("--out", out_dir, "Output directory")->required();
  derain->add_flag("--dump-intermediates", dump, "Also write R, I_p and the inverted detail image");

  std::string pairs, pred, ref, report;
  auto* eval = app.add_subcommand("eval", "PSNR and SSIM over image pairs");
  eval->add_option("--pairs", pairs, "Dataset directory: compares rain/ against norain/");
  eval->add_option("--pred", pred, "Directory of predictions");
  eval->add_option("--ref", ref, "Directory of references with the same file names");
  eval->add_option("--out", report, "Report file")->required();

  std::string rf_config;
  bool verify = false;
  auto* rf = app.add_subcommand("analyze-rf", "Receptive-field table of the detail branch");
  rf->add_option("--config", rf_config, "Training config (key = value)");
  rf->add_flag("--verify", verify, "Measure the impulse-response support as well");

  std::string se_ckpt, se_image, se_out;
  std::int64_t se_block = 0, top_k = 3;
  auto* se = app.add_subcommand("inspect-se", "SE gates of one rain residual block");
  se->add_option("--ckpt", se_ckpt, "Checkpoint")->required();
  se->add_option("--image", se_image, "Rainy PNG")->required();
  se->add_option("--block", se_block, "Block index")->required();
  se->add_option("--topk", top_k, "Channels to list at each end");
  se->add_option("--out", se_out, "Directory for the feature-map PNGs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) {
      if (sa.backgrounds.empty() == sa.procedural.empty()) throw UsageError("synth needs --backgrounds or --procedural");
      return cmd_synth(sa, out);
    }
    if (*train) return cmd_train(ta, out);
    if (*derain) return cmd_derain(ckpt, in, out_dir, dump, out);
    if (*eval) return cmd_eval(pairs, pred, ref, report, out);
    if (*rf) return cmd_analyze_rf(rf_config, verify, out);
    if (*se) return cmd_inspect_se(se_ckpt, se_image, se_block, top_k, se_out, out, err);
  } catch (const std::exception& e) {
    err << "drd: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace drd::cli
