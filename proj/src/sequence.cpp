#include "argen/sequence.hpp"

#include <algorithm>
#include <stdexcept>

namespace argen {

CompleteSequence CompleteSequence::checked(std::vector<TokenId> tokens, const Vocabulary& vocab) {
  if (tokens.empty()) throw std::invalid_argument("complete sequence must be nonempty");
  for (TokenId t : tokens) {
    if (!vocab.contains(t)) throw std::invalid_argument("token index out of range");
  }
  if (!vocab.is_eos(tokens.back()))
    throw std::invalid_argument("complete sequence must end in eos");
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (vocab.is_eos(tokens[i]))
      throw std::invalid_argument("complete sequence has interior eos");
  }
  return CompleteSequence(std::move(tokens), Unchecked{});
}

bool canonical_less_tokens(std::span<const TokenId> a, std::span<const TokenId> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool canonical_less(const CompleteSequence& a, const CompleteSequence& b) {
  return canonical_less_tokens(a.tokens(), b.tokens());
}

}  // namespace argen
