#include "argen/rng.hpp"

#include <stdexcept>

namespace argen {

std::uint64_t uniform_below_u64(SplitMix64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below_u64: bound must be positive");
  if (bound == 1) return 0;
  int bits = 64;
  while (bits > 1 && (bound >> (bits - 1)) == 0) --bits;
  const std::uint64_t mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
  for (;;) {
    const std::uint64_t draw = rng.next_u64() & mask;
    if (draw < bound) return draw;
  }
}

BigInt uniform_below(SplitMix64& rng, const BigInt& bound) {
  if (bound <= 0) throw std::invalid_argument("uniform_below: bound must be positive");
  if (bound <= std::uint64_t(~0ULL)) {
    return BigInt(uniform_below_u64(rng, bound.convert_to<std::uint64_t>()));
  }
  const unsigned bits = msb(bound) + 1;
  const unsigned words = (bits + 63) / 64;
  const unsigned top_bits = bits - 64 * (words - 1);
  const std::uint64_t top_mask = (top_bits == 64) ? ~0ULL : ((1ULL << top_bits) - 1);
  for (;;) {
    BigInt draw = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t word = rng.next_u64();
      if (w + 1 == words) word &= top_mask;
      draw |= BigInt(word) << (64 * w);
    }
    if (draw < bound) return draw;
  }
}

CategoricalSampler CategoricalSampler::from_masses(std::span<const Rat> masses) {
  CategoricalSampler s;
  BigInt common_den = 1;
  for (const Rat& m : masses) {
    if (m < 0) throw std::invalid_argument("CategoricalSampler: negative mass");
    if (m > 0) common_den = lcm(common_den, denominator(m));
  }
  s.total_big_ = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] == 0) continue;
    BigInt w = numerator(masses[i]) * (common_den / denominator(masses[i]));
    s.indices_.push_back(i);
    s.total_big_ += w;
    s.weights_big_.push_back(std::move(w));
  }
  s.fits64_ = s.total_big_ <= std::uint64_t(~0ULL);
  if (s.fits64_) {
    s.total64_ = s.total_big_.convert_to<std::uint64_t>();
    s.weights64_.reserve(s.weights_big_.size());
    for (const BigInt& w : s.weights_big_) s.weights64_.push_back(w.convert_to<std::uint64_t>());
  }
  return s;
}

std::size_t CategoricalSampler::draw(SplitMix64& rng) const {
  if (empty()) throw std::logic_error("CategoricalSampler::draw on empty sampler");
  if (fits64_) {
    std::uint64_t r = uniform_below_u64(rng, total64_);
    for (std::size_t k = 0; k < weights64_.size(); ++k) {
      if (r < weights64_[k]) return indices_[k];
      r -= weights64_[k];
    }
  } else {
    BigInt r = uniform_below(rng, total_big_);
    for (std::size_t k = 0; k < weights_big_.size(); ++k) {
      if (r < weights_big_[k]) return indices_[k];
      r -= weights_big_[k];
    }
  }
  throw std::logic_error("CategoricalSampler::draw fell off the table");
}

}  // namespace argen
