#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace ranslice {

// Deterministic 64-bit generator (xoshiro256**). Hand-rolled so that streams
// are bit-stable across standard libraries and platforms; std::mt19937_64
// would be stable too, but the std distributions on top of it are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the 4-word state
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
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

  // uniform in [0,1) with 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller (fresh pair every other call)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = mag * std::sin(two_pi * u2);
    have_spare_ = true;
    return mag * std::cos(two_pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Poisson via Knuth multiplication; fine for the small means used here
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stable stream derivation: one master seed fans out to named streams so that
// changing one stochastic element (e.g. traffic) leaves the others untouched.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id,
                                 std::uint64_t sub_id = 0) {
  std::uint64_t z = master ^ (stream_id * 0x9e3779b97f4a7c15ULL) ^
                    (sub_id * 0xd1b54a32d192ed03ULL) ^ 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace stream {
constexpr std::uint64_t kTopology = 1;
constexpr std::uint64_t kShadowing = 2;
constexpr std::uint64_t kTraffic = 3;
constexpr std::uint64_t kExploration = 4;
constexpr std::uint64_t kHarq = 5;
constexpr std::uint64_t kEquilibrium = 6;
}  // namespace stream

}  // namespace ranslice
