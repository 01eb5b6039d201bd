#pragma once

#include "argen/vocab.hpp"

#include <span>
#include <vector>

namespace argen {

// A complete sequence: nonempty, ends in eos, no interior eos.
class CompleteSequence {
 public:
  struct Unchecked {};

  // Validates the invariant against the vocabulary; throws on violation.
  static CompleteSequence checked(std::vector<TokenId> tokens, const Vocabulary& vocab);

  // For internal construction on paths that maintain the invariant.
  CompleteSequence(std::vector<TokenId> tokens, Unchecked) : tokens_(std::move(tokens)) {}

  const std::vector<TokenId>& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.size(); }
  bool operator==(const CompleteSequence&) const = default;

 private:
  std::vector<TokenId> tokens_;
};

// Length first, then lexicographic by token index: the canonical order used
// for enumeration output and MAP tie-breaking.
bool canonical_less_tokens(std::span<const TokenId> a, std::span<const TokenId> b);
bool canonical_less(const CompleteSequence& a, const CompleteSequence& b);

struct CanonicalLess {
  bool operator()(const CompleteSequence& a, const CompleteSequence& b) const {
    return canonical_less(a, b);
  }
};

}  // namespace argen
