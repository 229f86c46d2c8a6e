#pragma once

#include <cstdint>

namespace medirl {

/// SplitMix64. Used instead of <random> distributions because their output
/// is implementation-defined, and model files / synthetic data must be
/// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Slight modulo bias is irrelevant for n << 2^64.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// Per-component seed streams fanned out from the single experiment seed.
enum class SeedStream : std::uint64_t {
  network_init = 1,
  synthetic_data = 2,
  data_split = 3,
  batch_order = 4,
  baseline = 5,
  rollout = 6,
};

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  Rng mix(seed ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
  return mix.next_u64();
}

}  // namespace medirl
