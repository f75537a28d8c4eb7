#include "drd/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "drd/core/error.hpp"

namespace drd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  // FNV-1a over the label.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return Rng(splitmix64(splitmix64(seed ^ h) + splitmix64(index)));
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw UsageError("Rng::uniform_int: empty range");
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::set_state(const std::string& text) {
  std::istringstream is(text);
  is >> engine_;
  if (!is) throw CheckpointFormatError("invalid RNG state");
}

}  // namespace drd
