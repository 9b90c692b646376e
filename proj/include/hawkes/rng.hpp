#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hawkes {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// xoshiro256** (Blackman and Vigna). Cheap to seed, which matters because
// every Monte Carlo replication gets its own generator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) noexcept {
    for (auto& w : s_) {
      seed += 0x9e3779b97f4a7c15ULL;
      w = splitmix64(seed - 0x9e3779b97f4a7c15ULL);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t out = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return out;
  }

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

using Rng = Xoshiro256;

// Counter-based substream: the generator for replication `index` depends only
// on (seed, index), never on which thread runs it or in which order.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t a = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  return Rng(splitmix64(a ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  for (;;) {
    double u = static_cast<double>(rng() >> 11) * scale;
    if (u > 0.0) return u;
  }
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

}  // namespace hawkes
