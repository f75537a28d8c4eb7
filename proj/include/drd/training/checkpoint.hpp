#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drd/training/adam.hpp"
#include "drd/training/config.hpp"

namespace drd::training {

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;

  bool operator==(const StoredTensor&) const = default;
};

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  TrainConfig config;
  /// Completed iterations.
  std::int64_t iteration = 0;
  /// Parameters and buffers in module state order.
  std::vector<StoredTensor> tensors;
  OptimizerState optimizer;
  /// Batch sampler state.
  std::string rng_state;

  bool operator==(const Checkpoint&) const = default;
};

/// Little-endian: "DRDC", u32 version, config block (length-prefixed
/// key = value text), u64 iteration, u32 tensor count and per tensor (u32
/// name length, name, u8 dtype tag 1 = f32, u32 rank 4, 4 x i64 dims, f32
/// data), optimizer block (f64 beta1, beta2, eps, i64 t, u32 count, per entry
/// u64 length and f32 m then v), RNG block (length-prefixed text).
std::string serialize(const Checkpoint& ck);
/// CheckpointFormatError for a bad magic, version, truncation or trailing
/// bytes. Nothing is returned unless the whole buffer parses.
Checkpoint deserialize(const std::string& bytes, const std::string& source = "checkpoint");

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Snapshot of every parameter and buffer of `model`.
std::vector<StoredTensor> capture_state(nn::Module& model);
/// Checks every name and shape before copying anything; CompatibilityError
/// names the first mismatch.
void restore_state(nn::Module& model, const std::vector<StoredTensor>& tensors);

}  // namespace drd::training
