#pragma once

#include <cstdint>
#include <initializer_list>

namespace carnot {

// All randomness in the project funnels through this generator so that runs
// are reproducible from a single seed. Streams are derived by hashing the
// root seed with integer tags (level, cell index, partition, ...), which
// keeps results independent of thread scheduling.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
  }

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t st = seed;
    for (std::uint64_t t : tags) st = splitmix64(st) ^ (t * 0x9e3779b97f4a7c15ULL);
    for (auto& w : s_) w = splitmix64(st);
  }

  // xoshiro256++
  std::uint64_t next() {
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

  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform_pm1() { return 2.0 * u01() - 1.0; }
  int sign() { return (next() >> 63) ? 1 : -1; }
  bool coin() { return (next() >> 63) != 0; }
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace carnot
