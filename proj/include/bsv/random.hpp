#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace bsv {

/// SplitMix64 finalizer (Steele, Lea & Flood); used for seeding and for
/// deriving independent stream seeds from (master seed, stream, block).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Splitmix64 {
 public:
  explicit constexpr Splitmix64(std::uint64_t seed) : state_(seed) {}
  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256** (Blackman & Vigna), state expanded from a 64-bit seed via
/// SplitMix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256StarStar(std::uint64_t seed) {
    Splitmix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

/// Seed for the stream identified by (master_seed, stream_id, block_index).
/// The mapping is a fixed hash chain, so any pulse block can be generated on
/// any worker with bit-identical results.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                           std::uint64_t stream_id,
                                           std::uint64_t block_index = 0) {
  std::uint64_t h = splitmix64_mix(master_seed + 0x9E3779B97F4A7C15ull);
  h = splitmix64_mix(h ^ (stream_id + 0xD1B54A32D192ED03ull));
  h = splitmix64_mix(h ^ (block_index + 0x8CB92BA72F3D8DD7ull));
  return h;
}

/// One independent random stream with the variate generators the simulation
/// needs. All simulation randomness flows through streams derived from a
/// single master seed; there is no ambient entropy.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint64_t block_index = 0)
      : engine_(derive_stream_seed(master_seed, stream_id, block_index)) {}

  Xoshiro256StarStar& engine() { return engine_; }

  /// Uniform double strictly inside (0,1).
  double u01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (consumes two uniforms per draw).
  double normal() {
    const double u1 = u01();
    const double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Exponential with unit mean.
  double exponential() { return -std::log(u01()); }

  /// Exact binomial draw.
  std::int64_t binomial(std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::int64_t> dist(n, p);
    return dist(engine_);
  }

 private:
  Xoshiro256StarStar engine_;
};

}  // namespace bsv
