#pragma once

#include <cstdint>
#include <random>

namespace pfmap {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seed for a numbered child stream. Used to split work
// across blocks/workers so results do not depend on thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xd6e8feb86659fd93ULL * (stream + 1));
  splitmix64_next(s);
  return splitmix64_next(s);
}

// mt19937_64 core (bit-exact across platforms) with hand-rolled output
// transforms; std::*_distribution is implementation-defined and would
// break byte-identical reruns across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0,1), 53-bit resolution
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1), never returns 0 (safe for log())
  double u01_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Marsaglia-Tsang ziggurat (128 strips)
  double normal();

  // unbiased uniform integer in [0, n)
  std::uint32_t below(std::uint32_t n) {
    const std::uint64_t threshold = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= threshold);
    return static_cast<std::uint32_t>(x % n);
  }

 private:
  double normal_fix(std::int32_t hz, std::uint32_t iz);

  std::mt19937_64 gen_;
};

}  // namespace pfmap
