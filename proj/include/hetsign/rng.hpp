#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace hetsign {

// Derives an independent stream seed from (seed, stream).  SplitMix64
// finalizer over a golden-ratio step; every (seed, stream) pair maps to a
// well-scrambled 64-bit value, so trial t of a run seeded with s can use
// mix64(s, t) without overlapping neighbouring trials.
inline uint64_t mix64(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic random source.  The engine is mt19937_64 (bit-exact across
// platforms by the standard); the distributions are hand-rolled because the
// standard library's distribution objects are implementation-defined and
// would break reproducibility between compilers.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform on {0, ..., n-1} by rejection, bias-free.
  int uniform_int(int n) {
    if (n <= 0) throw std::domain_error("Rng::uniform_int: n must be positive");
    uint64_t un = static_cast<uint64_t>(n);
    uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  // Standard normal via Box-Muller.  No spare is cached: one draw consumes
  // exactly two uniforms, which keeps the stream position predictable.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Sum of n Bernoulli(p) draws.  n stays small here (node degrees), so the
  // naive loop is both fast enough and trivially reproducible.
  int binomial(int n, double p) {
    int s = 0;
    for (int i = 0; i < n; ++i) s += bernoulli(p) ? 1 : 0;
    return s;
  }

  // Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[i], v[static_cast<size_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hetsign
