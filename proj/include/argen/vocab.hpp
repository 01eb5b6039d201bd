#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace argen {

using TokenId = int;

// Finite vocabulary with a distinguished end-of-sequence token. Token
// identity is the index; labels are display-only.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> labels, TokenId eos_index);

  int size() const { return static_cast<int>(labels_.size()); }
  TokenId eos() const { return eos_; }
  bool is_eos(TokenId t) const { return t == eos_; }
  bool contains(TokenId t) const { return t >= 0 && t < size(); }
  const std::string& label(TokenId t) const { return labels_.at(t); }
  std::optional<TokenId> find(std::string_view label) const;

  // Labels joined by single spaces; the rendering used everywhere sequences
  // are shown or serialized.
  std::string render(std::span<const TokenId> tokens) const;

  bool operator==(const Vocabulary& other) const = default;

 private:
  std::vector<std::string> labels_;
  TokenId eos_;
};

}  // namespace argen
