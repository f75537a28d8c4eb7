#include "drd/training/config.hpp"

#include <cmath>
#include <string>

#include "drd/core/error.hpp"

namespace drd::training {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (epochs < 0) fail("epochs must be >= 0");
  if (iterations_per_epoch < 1) fail("iterations_per_epoch must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(lr0 > 0.0)) fail("lr0 must be > 0");
  if (lr_halving_period_epochs < 1) fail("lr_halving_period_epochs must be >= 1");
  if (crop_size < 1) fail("crop_size must be >= 1");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  loss.validate();
  net.validate();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "epochs", "iterations_per_epoch", "batch_size", "lr0", "lr_halving_period_epochs", "crop_size", "seed",
      "checkpoint_every", "lambda1", "lambda2", "feature_maps", "blocks_per_branch", "se_reduction", "dilations",
      "image_channels", "detail_branch"};
  return keys;
}

TrainConfig from_key_values(const KeyValues& kv) {
  kv.require_known(config_keys());
  TrainConfig c;
  c.epochs = kv.get_int("epochs", c.epochs);
  c.iterations_per_epoch = kv.get_int("iterations_per_epoch", c.iterations_per_epoch);
  c.batch_size = kv.get_int("batch_size", c.batch_size);
  c.lr0 = kv.get_double("lr0", c.lr0);
  c.lr_halving_period_epochs = kv.get_int("lr_halving_period_epochs", c.lr_halving_period_epochs);
  c.crop_size = kv.get_int("crop_size", c.crop_size);
  c.seed = kv.get_u64("seed", c.seed);
  c.checkpoint_every = kv.get_int("checkpoint_every", c.checkpoint_every);
  c.loss.lambda1 = kv.get_double("lambda1", c.loss.lambda1);
  c.loss.lambda2 = kv.get_double("lambda2", c.loss.lambda2);
  c.net.feature_maps = kv.get_int("feature_maps", c.net.feature_maps);
  c.net.blocks_per_branch = kv.get_int("blocks_per_branch", c.net.blocks_per_branch);
  c.net.se_reduction = kv.get_int("se_reduction", c.net.se_reduction);
  c.net.dilations = kv.get_int_list("dilations", c.net.dilations);
  c.net.image_channels = kv.get_int("image_channels", c.net.image_channels);
  c.net.detail_branch = kv.get_bool("detail_branch", c.net.detail_branch);
  c.validate();
  return c;
}

KeyValues to_key_values(const TrainConfig& c) {
  KeyValues kv;
  kv.set("epochs", std::to_string(c.epochs));
  kv.set("iterations_per_epoch", std::to_string(c.iterations_per_epoch));
  kv.set("batch_size", std::to_string(c.batch_size));
  kv.set("lr0", format_double(c.lr0));
  kv.set("lr_halving_period_epochs", std::to_string(c.lr_halving_period_epochs));
  kv.set("crop_size", std::to_string(c.crop_size));
  kv.set("seed", std::to_string(c.seed));
  kv.set("checkpoint_every", std::to_string(c.checkpoint_every));
  kv.set("lambda1", format_double(c.loss.lambda1));
  kv.set("lambda2", format_double(c.loss.lambda2));
  kv.set("feature_maps", std::to_string(c.net.feature_maps));
  kv.set("blocks_per_branch", std::to_string(c.net.blocks_per_branch));
  kv.set("se_reduction", std::to_string(c.net.se_reduction));
  std::string dil;
  for (int d : c.net.dilations) dil += (dil.empty() ? "" : ",") + std::to_string(d);
  kv.set("dilations", dil);
  kv.set("image_channels", std::to_string(c.net.image_channels));
  kv.set("detail_branch", c.net.detail_branch ? "true" : "false");
  return kv;
}

double lr_schedule(std::int64_t epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw UsageError("lr_schedule: negative epoch " + std::to_string(epoch));
  const auto halvings = epoch / cfg.lr_halving_period_epochs;
  return std::ldexp(cfg.lr0, -static_cast<int>(std::min<std::int64_t>(halvings, 2000)));
}

}  // namespace drd::training
