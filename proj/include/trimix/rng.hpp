#pragma once

#include <cmath>
#include <cstdint>

namespace trimix {

// Seed expansion (splitmix64). Also used to derive per-replica streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ with splitmix64 seeding. We roll our own instead of using
// <random> distributions so that identical seeds give identical streams on
// every platform/standard library.
class Rng {
 public:
  Rng() : Rng(0, 0) {}

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed;
    // fold the stream index into the seed sequence
    x ^= 0xbf58476d1ce4e5b9ULL * (stream + 1);
    s_[0] = splitmix64(x);
    s_[1] = splitmix64(x);
    s_[2] = splitmix64(x);
    s_[3] = splitmix64(x);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static Rng for_replica(std::uint64_t seed, std::uint64_t replica) {
    return Rng(seed, replica);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform double in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform double in (0, 1]; safe as a log() argument
  double uniform01_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform01_open()) / rate; }

  // unbiased uniform integer in [0, bound), bound >= 1 (Lemire)
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 mul =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
    auto lo = static_cast<std::uint64_t>(mul);
    if (lo < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        mul = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
        lo = static_cast<std::uint64_t>(mul);
      }
    }
    return static_cast<std::uint64_t>(mul >> 64);
  }

  bool bit() { return (next_u64() >> 63) != 0; }

  int sign() { return bit() ? 1 : -1; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

}  // namespace trimix
