#pragma once

#include <cstdint>
#include <string_view>

namespace entroscope {

//! splitmix64 mixing step; also used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

//! xoshiro256++ generator.  Self-contained so that sampled streams are
//! bit-identical across platforms and standard-library versions.
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
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

  //! Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

//! Deterministic per-cell seed for benchmark replicates.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view density_id,
                                 std::uint64_t n, std::uint64_t replicate) {
  std::uint64_t st = master;
  std::uint64_t h = splitmix64(st);
  st = h ^ fnv1a64(density_id);
  h = splitmix64(st);
  st = h ^ n;
  h = splitmix64(st);
  st = h ^ replicate;
  return splitmix64(st);
}

}  // namespace entroscope
