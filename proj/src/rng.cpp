#include "privmt/rng.hpp"

namespace privmt {

std::uint64_t SplitMix64::next_below(std::uint64_t n) {
  // Reject draws from the final partial block of [0, 2^64).
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n) - 1;
  std::uint64_t value = next();
  while (value > limit) value = next();
  return value % n;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

SplitMix64 derive_rng(std::uint64_t seed, std::string_view pair_id) {
  return SplitMix64(seed ^ (fnv1a64(pair_id) * 0x9E3779B97F4A7C15ull));
}

}  // namespace privmt
