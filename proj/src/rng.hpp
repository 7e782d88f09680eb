#pragma once

#include <cstdint>

namespace colorforest {

// splitmix64. All randomized stages draw from this generator instead of the
// standard library distributions, so identical seeds give identical results
// on every platform and at every thread count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) via fixed-point multiply; n must be nonzero.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Independent child stream for (seed, tag); used to split one seed into
// decorrelated per-tree and per-node streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ull * (tag + 1)));
  return g.next();
}

}  // namespace colorforest
