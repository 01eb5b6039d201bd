#pragma once

#include "argen/markov.hpp"
#include "argen/sequence.hpp"
#include "argen/vocab.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace argen {

// Per-position allowed token sets S_1..S_n; feasible sequences have length
// exactly n with x_i in S_i (the last set must admit eos for the feasible
// set to be nonempty).
struct UnaryConstraint {
  std::vector<std::vector<TokenId>> allowed_sets;
};

// Complete sequences of length exactly `length` (so length-1 non-eos tokens
// followed by eos).
struct FixedLengthConstraint {
  int length = 1;
};

// Additive token weights with an exact total target; the sum runs over
// every position including the final eos.
struct MetricalConstraint {
  std::vector<std::uint64_t> weights;  // indexed by token
  std::uint64_t target = 0;
};

// Pins a prefix u and a suffix v inside a complete sequence of total length
// exactly total_length. The suffix, when nonempty, must end in eos (a
// complete sequence ends in eos, so any other tail is infeasible and is
// rejected at compile time).
struct InpaintingSpec {
  std::vector<TokenId> prefix;
  std::vector<TokenId> suffix;
  int total_length = 1;
};

struct Budget {
  std::vector<std::uint64_t> weights;  // indexed by token
  std::uint64_t target = 0;
};

// The single normal form every constraint compiles to: a deterministic
// acceptor run over all tokens of a complete sequence including the final
// eos, optionally paired with an additive budget. A sequence is feasible
// iff the run never rejects, ends in an accepting state, and (with a
// budget) the accumulated weight equals the target exactly.
class ConstraintAutomaton {
 public:
  static constexpr int kReject = -1;

  ConstraintAutomaton(std::string description, int num_tokens, int num_states, int initial,
                      std::vector<int> transitions,  // num_states * num_tokens, kReject allowed
                      std::vector<bool> accepting, std::optional<Budget> budget);

  const std::string& description() const { return description_; }
  int num_tokens() const { return num_tokens_; }
  int num_states() const { return num_states_; }
  int initial() const { return initial_; }
  bool accepting(int state) const { return accepting_.at(state); }
  const std::optional<Budget>& budget() const { return budget_; }

  int step(int state, TokenId token) const { return transitions_[state * num_tokens_ + token]; }

  // Number of tokens on the longest non-reject path from the initial state;
  // empty when the transition graph has a reachable cycle.
  std::optional<int> length_bound() const { return length_bound_; }

  // An upper bound on the length of any feasible sequence, from acyclicity
  // or from a budget whose non-eos weights are all >= 1. Empty when neither
  // applies (the feasible set may be infinite).
  std::optional<int> implied_horizon(TokenId eos) const;

  // Whether a finite backward recursion exists: acyclic, or budgeted with
  // every non-eos weight >= 1.
  bool dp_computable(TokenId eos) const;

 private:
  std::string description_;
  int num_tokens_;
  int num_states_;
  int initial_;
  std::vector<int> transitions_;
  std::vector<bool> accepting_;
  std::optional<Budget> budget_;
  std::optional<int> length_bound_;
};

ConstraintAutomaton compile(const UnaryConstraint& c, const Vocabulary& vocab);
ConstraintAutomaton compile(const FixedLengthConstraint& c, const Vocabulary& vocab);
ConstraintAutomaton compile(const MetricalConstraint& c, const Vocabulary& vocab);
ConstraintAutomaton compile(const InpaintingSpec& c, const Vocabulary& vocab);

bool accepts(const ConstraintAutomaton& automaton, const CompleteSequence& x);

// DP table width for the product of model and constraint:
// model states x automaton states x (budget target + 1 when present).
long long product_size(const ConstraintAutomaton& automaton, const MarkovModel& model);

// A running position inside the constraint: the automaton state plus the
// remaining budget (ignored when the constraint carries none).
struct ConstraintCursor {
  int state = 0;
  std::uint64_t remaining = 0;
};

ConstraintCursor start_cursor(const ConstraintAutomaton& automaton);

// One-step admissibility, with no lookahead beyond the token itself:
// the transition must not reject; a budgeted non-eos token must fit the
// remaining budget; eos ends the sequence, so choosing it additionally
// requires an accepting landing state and an exactly-consumed budget.
bool admissible_step(const ConstraintAutomaton& automaton, const Vocabulary& vocab,
                     const ConstraintCursor& cursor, TokenId token);

// Advances past an admissible non-eos token.
ConstraintCursor advance_cursor(const ConstraintAutomaton& automaton,
                                const ConstraintCursor& cursor, TokenId token);

// Constraint file reader. Tagged line-oriented formats ('#' lines and blank
// lines ignored); the exact grammar is documented in the README:
//   unary <n>        then n lines of allowed token labels
//   fixedlen <L>
//   metrical <K>     then one '<label> <weight>' line per token
//   inpaint <L>      then 'prefix <k> <labels...>' and 'suffix <k> <labels...>'
//   dfa <states> <initial>   then 'accepting <k> <states...>' and
//                            'trans <from> <label> <to>' lines
ConstraintAutomaton parse_constraint(std::istream& in, const Vocabulary& vocab);
ConstraintAutomaton parse_constraint_text(std::string_view text, const Vocabulary& vocab);
ConstraintAutomaton load_constraint_file(const std::string& path, const Vocabulary& vocab);

}  // namespace argen
