#pragma once

#include "argen/rational.hpp"
#include "argen/rng.hpp"
#include "argen/sequence.hpp"
#include "argen/vocab.hpp"

#include <optional>
#include <span>
#include <vector>

namespace argen {

// An autoregressive model: a finite vocabulary plus exact next-token
// conditionals evaluable for any eos-free prefix. Every row consists of
// nonnegative rationals summing to exactly 1. Models are immutable after
// construction and safe to share across threads; sampling state lives in
// the caller's generator.
class ArModel {
 public:
  virtual ~ArModel() = default;

  virtual const Vocabulary& vocab() const = 0;

  // Rejects prefixes containing eos (generation has already terminated
  // there, so no conditional exists).
  std::vector<Rat> next_token_distribution(std::span<const TokenId> prefix) const;

 protected:
  virtual std::vector<Rat> conditional_row(std::span<const TokenId> prefix) const = 0;
};

// Chain-rule product of the local conditionals along x.
Rat sequence_probability(const ArModel& model, const CompleteSequence& x);

struct AncestralResult {
  // Empty when eos was not reached within max_steps; that is a normal
  // outcome, not an error.
  std::optional<CompleteSequence> sequence;
  // The tokens drawn so far (equals sequence->tokens() on success).
  std::vector<TokenId> prefix;
};

AncestralResult ancestral_sample(const ArModel& model, SplitMix64& rng, int max_steps);

}  // namespace argen
