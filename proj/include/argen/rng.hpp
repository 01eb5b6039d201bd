#pragma once

#include "argen/rational.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace argen {

// SplitMix64: seedable, portable, and platform-independent (no std
// distribution facilities anywhere). Independent streams for trials come
// from derive(), which reseeds through the same finalizer:
//
//   derive(i) == SplitMix64(mix(seed ^ mix(i + 1)))
//
// so the sequence of draws for a given (seed, stream) pair is identical on
// every platform and every run.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return finalize(state_);
  }

  static std::uint64_t mix(std::uint64_t x) { return finalize(x + 0x9E3779B97F4A7C15ULL); }

  SplitMix64 derive(std::uint64_t stream) const {
    return SplitMix64(mix(seed_ ^ mix(stream + 1)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

// Uniform integer in [0, bound); bound > 0. Exact: rejection sampling on
// bound.bit_length() bits.
std::uint64_t uniform_below_u64(SplitMix64& rng, std::uint64_t bound);
BigInt uniform_below(SplitMix64& rng, const BigInt& bound);

// Draws indices i with exact probability masses[i] / sum(masses). Masses are
// integerized over their common denominator once at construction;
// zero-mass indices are never drawn. Uses plain 64-bit arithmetic whenever
// the integerized weights fit.
class CategoricalSampler {
 public:
  static CategoricalSampler from_masses(std::span<const Rat> masses);

  // Total mass is zero; draw() must not be called.
  bool empty() const { return indices_.empty(); }

  std::size_t draw(SplitMix64& rng) const;

 private:
  std::vector<std::size_t> indices_;
  std::vector<std::uint64_t> weights64_;
  std::uint64_t total64_ = 0;
  std::vector<BigInt> weights_big_;
  BigInt total_big_;
  bool fits64_ = true;
};

}  // namespace argen
