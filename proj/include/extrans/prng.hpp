#pragma once

#include <cstdint>

namespace extrans {

/// SplitMix64 (Steele, Lea, Flood 2014). Used only to expand a 64-bit seed
/// into generator state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna), state filled by four SplitMix64
/// outputs of the seed. Platform independent: only 64-bit unsigned
/// arithmetic is used.
///
/// Derived draws:
///   uniform01()  - top 53 bits scaled by 2^-53, in [0, 1)
///   bernoulli(p) - uniform01() < p, so p = 0 never and p = 1 always fires
///   bounded(n)   - uniform in [0, n) by rejection: draws below
///                  (2^64 - n) mod n are discarded, then the result is
///                  r mod n (no modulo bias)
class Prng {
 public:
  explicit Prng(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  /// Raw state constructor, for reference-vector tests.
  static Prng from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2,
                         std::uint64_t s3) noexcept {
    Prng p(0);
    p.s_[0] = s0;
    p.s_[1] = s1;
    p.s_[2] = s2;
    p.s_[3] = s3;
    return p;
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Requires n >= 1.
  std::uint64_t bounded(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace extrans
