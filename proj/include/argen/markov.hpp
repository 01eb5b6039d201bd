#pragma once

#include "argen/armodel.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace argen {

// Table-based Markov model of order k. The state for a prefix is its last
// min(k, length) tokens (padded-context convention: a prefix shorter than
// the order is its own state). A row must be present for every non-eos
// context of length <= k, which makes conditional evaluation total on
// eos-free prefixes; states containing eos are unreachable and rejected.
//
// Text format (one model per file, '#' lines and blank lines ignored):
//
//   markov <order> <vocab-size>
//   <token-label> [eos]          one line per token; exactly one marked eos
//   <context tokens> | <p/q> ... one line per state, vocab-size rationals
//
// The initial state's context is empty (its line starts with '|'). Rows
// must sum to exactly 1; the loader verifies and reports line numbers.
class MarkovModel final : public ArModel {
 public:
  MarkovModel(Vocabulary vocab, int order,
              std::map<std::vector<TokenId>, std::vector<Rat>> rows);

  const Vocabulary& vocab() const override { return vocab_; }
  int order() const { return order_; }

  // State indexing for product dynamic programs. States are ordered
  // canonically (context length, then lexicographic).
  int num_states() const { return static_cast<int>(contexts_.size()); }
  int initial_state() const { return 0; }
  std::span<const TokenId> state_context(int state) const;
  int state_for_prefix(std::span<const TokenId> prefix) const;
  int transition(int state, TokenId token) const;  // token must be non-eos
  const std::vector<Rat>& row(int state) const { return rows_[state]; }
  const CategoricalSampler& row_sampler(int state) const { return samplers_[state]; }

  static MarkovModel parse(std::istream& in);
  static MarkovModel parse_text(std::string_view text);
  static MarkovModel load_file(const std::string& path);
  std::string serialize() const;

 protected:
  std::vector<Rat> conditional_row(std::span<const TokenId> prefix) const override;

 private:
  int context_index(std::span<const TokenId> context) const;

  Vocabulary vocab_;
  int order_;
  std::vector<std::vector<TokenId>> contexts_;   // canonical order; contexts_[0] is empty
  std::vector<std::vector<Rat>> rows_;
  std::vector<std::vector<int>> transitions_;    // [state][non-eos token] -> state
  std::vector<CategoricalSampler> samplers_;
};

}  // namespace argen
