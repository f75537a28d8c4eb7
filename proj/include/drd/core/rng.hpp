#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace drd {

/// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
/// is fixed by the standard) and derives reals without the
/// implementation-defined std distributions, so streams are identical on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Child stream keyed by a purpose label and an index. Independent of
  /// how many values the parent has drawn.
  static Rng derive(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller (no cached second value, so the state is
  /// fully described by the engine).
  double normal();

  /// Serialized engine state (the standard textual representation).
  std::string state() const;
  void set_state(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace drd
