#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace gapfair {

// splitmix64 output mix. All randomness in the project flows through this
// function so that runs reproduce bit-exactly across platforms and languages;
// std::mt19937 + std::shuffle are implementation-defined and never used.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based seed splitting: a child stream is identified by the path of
// stream ids from the master seed, e.g. derive_seed(master, {kStreamTrain, run}).
// The scheme is recorded in every run manifest.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64_mix(seed);
  for (std::uint64_t id : path) {
    s = splitmix64_mix(s ^ splitmix64_mix(id + 0x632BE59BD9B4E019ULL));
  }
  return s;
}

// Named sub-streams of a run seed (manifest-documented).
enum : std::uint64_t {
  kStreamSynthetic = 1,
  kStreamSplit = 2,
  kStreamTrain = 3,
  kStreamGuard = 4,
  kStreamEo = 5,
  kStreamInit = 6,
};

// Minimal deterministic PRNG (splitmix64 sequence).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  // Standard normal via Box-Muller (deterministic, no cached spare).
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Fisher-Yates shuffle with explicit draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace gapfair
