#pragma once

#include <cstdint>
#include <random>

namespace gpner {

// Seeded PRNG used everywhere randomness is needed. The uniform mappings are
// hand-rolled on top of mt19937_64 so that identical seeds give identical
// streams run to run.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t v = next();
    while (v >= limit) v = next();
    return lo + static_cast<int>(v % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Derive an independent seed from (seed, stream), e.g. to mix the epoch
  // index into the shuffle seed.
  static uint64_t mix(uint64_t seed, uint64_t stream) {
    uint64_t z = seed ^ (stream * 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gpner
