#pragma once

#include <cstdint>
#include <random>

namespace spip {

/// Seeded random stream passed by reference into every sampling operation.
/// Substreams derived from (seed, index) are independent of scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix(seed)) {}

  static RandomStream derive(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(mix(seed) ^ mix(index + 0x5851F42D4C957F2Dull));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  /// Uniform on [0, 1); only used for generating instances, never for state.
  double uniform_real() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace spip
