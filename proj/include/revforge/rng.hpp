// rng.hpp
//
// Deterministic PRNG used across the pipeline. splitmix64 with the standard
// increment/mix constants, so every stream can be reimplemented bit-exactly
// in any language. Uniform reals take the high 53 bits / 2^53.

#ifndef REVFORGE_RNG_HPP
#define REVFORGE_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace revforge {

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() { return mix64(state_ += 0x9E3779B97F4A7C15ULL); }

  // Uniform in [0, 1); never returns 1.0.
  double uniform() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Uniform integer in [0, n). Requires 0 < n < 2^53.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(uniform() * static_cast<double>(n));
  }

 private:
  uint64_t state_;
};

// Derives an independent stream for a record identified by (seed, parts...),
// e.g. derive_seed(seed, {page_id, pair_index, segment_index}). Results are
// independent of scheduling order, which is what makes the data-parallel
// kernels byte-deterministic across worker counts.
inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> parts) {
  uint64_t s = seed;
  for (uint64_t p : parts) s = mix64((s + 0x9E3779B97F4A7C15ULL) ^ p);
  return s;
}

}  // namespace revforge

#endif  // REVFORGE_RNG_HPP
