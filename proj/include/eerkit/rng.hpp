#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace eerkit {

/// Splittable counter-style generator (SplitMix64 core). Every consumer
/// derives its own stream from (master seed, tag words...), so independent
/// work items draw from independent streams and results do not depend on
/// scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derive an independent stream keyed by the seed and a list of tag words
  /// (purpose constant, feature index, rep index, ...).
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = mix64(seed + kGamma);
    for (std::uint64_t t : tags) {
      h = mix64(h ^ (t * 0xd1b54a32d192ed03ULL + kGamma));
    }
    return Rng(h);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  /// Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, bound), rejection-sampled so it is exact for any
  /// bound and portable across platforms.
  std::uint64_t next_below(std::uint64_t bound) {
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  /// Standard normal deviate via the Marsaglia polar transform.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream purpose tags. Keeping them in one place guards against two callers
/// accidentally deriving the same stream.
namespace streams {
inline constexpr std::uint64_t kSynthFeature = 0x01;
inline constexpr std::uint64_t kBandTarget = 0x02;
inline constexpr std::uint64_t kSubsetSubjects = 0x03;
inline constexpr std::uint64_t kSubsetFeatures = 0x04;
inline constexpr std::uint64_t kExperimentRun = 0x05;
inline constexpr std::uint64_t kStandinLatent = 0x06;
inline constexpr std::uint64_t kStandinBasis = 0x07;
inline constexpr std::uint64_t kStandinNoise = 0x08;
}  // namespace streams

}  // namespace eerkit
