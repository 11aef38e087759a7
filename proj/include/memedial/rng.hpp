#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace memedial {

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::span<const std::byte> bytes);

// SplitMix64 finalizer; a bijective mix of a 64-bit word.
std::uint64_t splitmix64(std::uint64_t x);

// Seed of session `index` in a batch seeded with `global_seed`.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index);

// Counter-based standard normal stream: draw(i) depends only on (key, i).
class CounterNormalStream {
 public:
  explicit CounterNormalStream(std::uint64_t key) : key_(key) {}
  double draw(std::uint64_t index) const;

 private:
  std::uint64_t key_;
};

// Per-session generator. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the draws below avoid std::*_distribution because
// those are implementation-defined.
class SessionRng {
 public:
  explicit SessionRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);
  // Fair coin.
  bool coin();

 private:
  std::mt19937_64 engine_;
};

}  // namespace memedial
