#include "drd/training/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "drd/core/error.hpp"
#include "drd/metrics/losses.hpp"
#include "drd/tensor/graph.hpp"

namespace drd::training {

std::string trace_line(const StepRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%lld %.9g %.9g %.9g %.9g\n", static_cast<long long>(r.iteration), r.lr,
                r.loss_total, r.loss_rain, r.loss_detail);
  return buf;
}

namespace {

const std::string* first_non_finite(std::span<const nn::NamedTensor> tensors) {
  for (const auto& t : tensors)
    for (float v : t.value.data())
      if (!std::isfinite(v)) return &t.name;
  return nullptr;
}

bool finite(const Tensor& t) {
  for (float v : t.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

Trainer::Trainer(const TrainConfig& cfg, std::vector<rain::Pair> data)
    : cfg_(cfg), data_(std::move(data)), model_((cfg.validate(), cfg.net)), rng_(Rng::derive(cfg.seed, "train.batches")) {
  check_data();
  model_.initialize(cfg_.seed);
  params_ = nn::named_parameters(model_);
  opt_ = make_optimizer_state(params_);
}

Trainer::Trainer(const Checkpoint& ck, std::vector<rain::Pair> data)
    : cfg_(ck.config), data_(std::move(data)), model_((ck.config.validate(), ck.config.net)) {
  check_data();
  restore_state(model_, ck.tensors);
  params_ = nn::named_parameters(model_);
  if (ck.optimizer.m.size() != params_.size()) {
    throw CompatibilityError("checkpoint optimizer has " + std::to_string(ck.optimizer.m.size()) +
                             " moment pairs for " + std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (ck.optimizer.m[i].size() != static_cast<std::size_t>(params_[i].value.numel())) {
      throw CompatibilityError("checkpoint optimizer moments for '" + params_[i].name + "' have the wrong size");
    }
  }
  opt_ = ck.optimizer;
  rng_.set_state(ck.rng_state);
  iteration_ = ck.iteration;
}

void Trainer::check_data() const {
  if (data_.empty()) throw UsageError("training set is empty");
  for (const auto& p : data_) {
    if (p.rainy.height < cfg_.crop_size || p.rainy.width < cfg_.crop_size) {
      throw ConfigError("pair '" + p.id + "' (" + std::to_string(p.rainy.height) + "x" + std::to_string(p.rainy.width) +
                        ") is smaller than crop_size " + std::to_string(cfg_.crop_size));
    }
    if (p.rainy.channels != cfg_.net.image_channels) {
      throw DimensionError("pair '" + p.id + "' has " + std::to_string(p.rainy.channels) + " channels");
    }
  }
}

StepRecord Trainer::step() {
  if (done()) throw UsageError("training already finished");
  const std::int64_t cs = cfg_.crop_size;
  std::vector<Image> rainy, clean;
  for (std::int64_t b = 0; b < cfg_.batch_size; ++b) {
    const auto& p = data_[rng_.uniform_int(data_.size())];
    const auto y = static_cast<std::int64_t>(rng_.uniform_int(static_cast<std::uint64_t>(p.rainy.height - cs + 1)));
    const auto x = static_cast<std::int64_t>(rng_.uniform_int(static_cast<std::uint64_t>(p.rainy.width - cs + 1)));
    rainy.push_back(crop(p.rainy, y, x, cs, cs));
    clean.push_back(crop(p.background, y, x, cs, cs));
  }
  std::vector<Image> target;
  for (std::size_t b = 0; b < rainy.size(); ++b) target.push_back(rain::rain_target(rainy[b], clean[b]));
  const Tensor o = stack(rainy), b_gt = stack(clean), r_gt = stack(target);

  StepRecord rec;
  rec.iteration = iteration_ + 1;
  rec.lr = lr_schedule(iteration_ / cfg_.iterations_per_epoch, cfg_);

  nn::zero_grad(model_);
  model_.set_training(true);
  const auto out = model_.forward(o);
  const Tensor lr_loss = metrics::loss_rain(out.rain, r_gt);
  const Tensor ld_loss = metrics::loss_detail(out.preliminary, out.detail, b_gt);
  const Tensor total = metrics::loss_total(lr_loss, ld_loss, cfg_.loss);
  rec.loss_total = total.item();
  rec.loss_rain = lr_loss.item();
  rec.loss_detail = ld_loss.item();

  const std::string at = " at iteration " + std::to_string(rec.iteration);
  if (!std::isfinite(rec.loss_total)) {
    if (const auto* name = first_non_finite(params_)) throw NumericError("non-finite parameter '" + *name + "'" + at);
    if (!finite(out.rain)) throw NumericError("non-finite activation 'rain' (R)" + at);
    if (!finite(out.detail)) throw NumericError("non-finite activation 'detail' (I_r)" + at);
    throw NumericError("non-finite loss" + at);
  }
  backward(total);
  adam_step(params_, opt_, rec.lr);
  if (const auto* name = first_non_finite(params_)) throw NumericError("parameter '" + *name + "' became non-finite" + at);
  ++iteration_;
  return rec;
}

Checkpoint Trainer::checkpoint() {
  Checkpoint ck;
  ck.config = cfg_;
  ck.iteration = iteration_;
  ck.tensors = capture_state(model_);
  ck.optimizer = opt_;
  ck.rng_state = rng_.state();
  return ck;
}

}  // namespace drd::training
