#pragma once

#include <cstdint>
#include <string_view>

namespace privmt {

// Deterministic generator with a fully specified algorithm (splitmix64).
// The standard <random> engines are portable but the distributions are not,
// and run reports must be byte-identical across platforms, so bounded draws
// are implemented here as well.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection sampling, no modulo bias. n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// FNV-1a, the stable string hash used to derive per-sentence streams.
std::uint64_t fnv1a64(std::string_view s);

// Every sentence gets its own stream as a pure function of (global seed,
// pair id), so the sampling outcome cannot depend on worker scheduling.
SplitMix64 derive_rng(std::uint64_t seed, std::string_view pair_id);

}  // namespace privmt
