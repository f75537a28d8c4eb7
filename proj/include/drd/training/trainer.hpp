#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drd/net/networks.hpp"
#include "drd/rain/synth.hpp"
#include "drd/training/checkpoint.hpp"

namespace drd::training {

struct StepRecord {
  std::int64_t iteration = 0;  // 1-based
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_rain = 0.0;
  double loss_detail = 0.0;
};

/// `iter lr loss_total loss_rain loss_detail`, newline terminated.
std::string trace_line(const StepRecord& r);

/// Adam on the combined loss over random crops of the training pairs. All
/// randomness comes from the config seed: weights from the "init.*" streams,
/// batches from "train.batches".
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::vector<rain::Pair> data);
  /// Continues from a checkpoint, bit-identical to a run that never stopped.
  Trainer(const Checkpoint& ck, std::vector<rain::Pair> data);

  /// One iteration. NumericError when the loss, an output or a parameter
  /// becomes non-finite, naming the first offender.
  StepRecord step();
  bool done() const { return iteration_ >= cfg_.total_iterations(); }
  std::int64_t iteration() const { return iteration_; }

  Checkpoint checkpoint();
  net::DRDNet& model() { return model_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  void check_data() const;

  TrainConfig cfg_;
  std::vector<rain::Pair> data_;
  net::DRDNet model_;
  std::vector<nn::NamedTensor> params_;
  OptimizerState opt_;
  Rng rng_;
  std::int64_t iteration_ = 0;
};

}  // namespace drd::training
