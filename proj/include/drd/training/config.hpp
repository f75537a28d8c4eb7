#pragma once

#include <cstdint>

#include "drd/core/keyvalue.hpp"
#include "drd/metrics/losses.hpp"
#include "drd/net/networks.hpp"

namespace drd::training {

struct TrainConfig {
  std::int64_t epochs = 120;
  std::int64_t iterations_per_epoch = 1000;
  std::int64_t batch_size = 4;
  double lr0 = 0.01;
  std::int64_t lr_halving_period_epochs = 15;
  /// Side of the square random crops batches are cut from.
  std::int64_t crop_size = 64;
  std::uint64_t seed = 0;
  /// Periodic checkpoint interval in iterations; 0 writes only the final one.
  std::int64_t checkpoint_every = 0;
  metrics::LossConfig loss;
  net::NetworkConfig net;

  /// epochs may be 0 (initialization only); every other count must be >= 1.
  void validate() const;
  std::int64_t total_iterations() const { return epochs * iterations_per_epoch; }
  bool operator==(const TrainConfig&) const = default;
};

/// Every key accepted by from_key_values.
const std::vector<std::string>& config_keys();

/// Unknown keys are a ConfigError; missing keys keep their defaults.
TrainConfig from_key_values(const KeyValues& kv);
KeyValues to_key_values(const TrainConfig& cfg);

/// lr0 * 2^-floor(epoch / period).
double lr_schedule(std::int64_t epoch, const TrainConfig& cfg);

}  // namespace drd::training
