#pragma once

#include <cstdint>
#include <optional>

namespace leocell {

/// SplitMix64 (Steele, Lea, Flood 2014). Used only to expand a 64-bit seed
/// into generator state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna). State words are the first four
/// SplitMix64 outputs from the seed. Not thread-safe; use one per thread or
/// per substream.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  /// Independent stream for a numbered consumer (e.g. one simulated
  /// setting). Seeded with seed ^ (0x9E3779B97F4A7C15 * (index + 1)).
  static Xoshiro256 substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next();

  /// 53-bit uniform in [0, 1): (next() >> 11) * 2^-53.
  double uniform01();

  /// a + (b - a) * uniform01().
  double uniform(double a, double b);

 private:
  std::uint64_t s_[4];
};

/// Standard normal draws by the Box-Muller transform. Each pair of uniforms
/// (u1 = 1 - uniform01(), u2 = uniform01()) yields
///   z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2);
/// z0 is returned first and z1 is cached for the following call.
class GaussianSampler {
 public:
  explicit GaussianSampler(Xoshiro256 rng) : rng_(rng) {}

  double standard();
  double operator()(double mean, double sd) { return mean + sd * standard(); }

 private:
  Xoshiro256 rng_;
  std::optional<double> cached_;
};

}  // namespace leocell
