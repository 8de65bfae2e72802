#pragma once

#include <cstdint>
#include <limits>

namespace sgmap {

/// SplitMix64 step: advances `state` and returns a well-mixed 64-bit word.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent 64-bit key from a base seed and a path of indices.
/// Used to give each (seed, replication, purpose) its own sub-stream, so the
/// numbers a replication sees do not depend on which thread runs it.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0) noexcept {
  std::uint64_t s = seed;
  std::uint64_t k = splitmix64(s);
  s = k ^ (a * 0xd1b54a32d192ed03ULL);
  k = splitmix64(s);
  s = k ^ (b * 0x8cb92ba72f3d8dd7ULL);
  return splitmix64(s);
}

/// xoshiro256** seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    for (auto& w : s_) w = splitmix64(seed);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
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

  /// Uniform integer in [0, bound) without modulo bias (Lemire).
  std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 prod = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        prod = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(prod);
      }
    }
    return static_cast<std::uint64_t>(prod >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4]{};
};

/// Stream purposes for derive_key; keep signal and noise independent so a
/// fixed-signal run still sees the same noise as a resampled one.
enum class Stream : std::uint64_t { signal = 1, noise = 2, instance = 3 };

inline Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t index,
                              Stream purpose) noexcept {
  return Xoshiro256(derive_key(seed, index, static_cast<std::uint64_t>(purpose)));
}

}  // namespace sgmap
