#include "argen/vocab.hpp"

#include <set>
#include <stdexcept>

namespace argen {

Vocabulary::Vocabulary(std::vector<std::string> labels, TokenId eos_index)
    : labels_(std::move(labels)), eos_(eos_index) {
  if (labels_.size() < 2) throw std::invalid_argument("vocabulary needs at least 2 tokens");
  if (eos_ < 0 || eos_ >= size()) throw std::invalid_argument("eos index out of range");
  std::set<std::string_view> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw std::invalid_argument("empty token label");
    if (!seen.insert(l).second) throw std::invalid_argument("duplicate token label: " + l);
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view label) const {
  for (int i = 0; i < size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::string Vocabulary::render(std::span<const TokenId> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += label(tokens[i]);
  }
  return out;
}

}  // namespace argen
