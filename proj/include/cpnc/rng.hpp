#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cpnc {

// Mixes a base seed with a stream id so every stochastic component gets an
// independent generator from the single global seed.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Fixed stream ids per pipeline component.
enum RngStream : uint64_t {
  kStreamEncoderInit = 1,
  kStreamSamples = 2,
  kStreamPretrainShuffle = 3,
  kStreamSparsify = 4,
  kStreamGcnInit = 5,
  kStreamModelInit = 6,
  kStreamDropout = 7,
  kStreamTrainShuffle = 8,
  kStreamKmeans = 9,
  kStreamRandomSem = 10,
  kStreamResample = 11,
  kStreamHeadInit = 12,
};

// mt19937_64 with hand-rolled distributions, so streams do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925287 * u2);
  }

  // Unbiased integer in [0, n); n must be positive.
  uint64_t bounded(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace cpnc
