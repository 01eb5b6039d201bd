#pragma once

#include "argen/armodel.hpp"
#include "argen/constraints.hpp"

#include <optional>
#include <string>
#include <vector>

namespace argen {

// The heuristic constrained-generation procedures practitioners substitute
// for exact conditioning, implemented faithfully so their bias is
// measurable. All of them mask with one-step automaton admissibility only
// (no continuation masses, no lookahead), and all of them treat tokens with
// zero model probability as inadmissible.
namespace decoders {

enum class Kind { greedy, beam, rejection, masked_ancestral, exact };

Kind parse_kind(std::string_view name);
std::string kind_name(Kind kind);

struct Config {
  Kind kind = Kind::greedy;
  int beam_width = 1;       // beam only
  int max_attempts = 1000;  // rejection only
  int max_steps = 64;

  void validate() const;
  std::string id() const;
};

struct Outcome {
  enum class Fail { none, dead_end, step_limit, exhausted };

  std::optional<CompleteSequence> sequence;
  // On a dead end: the trapped prefix that admitted no token.
  std::vector<TokenId> failure_prefix;
  Fail fail = Fail::none;
  // Rejection sampling: ancestral attempts consumed (max_attempts when
  // exhausted). 1 for the other decoders.
  int attempts = 1;

  bool ok() const { return sequence.has_value(); }
};

// Takes the highest-probability admissible token at every step (ties by
// token index). Dead ends and unreached eos are reported outcomes, not
// errors.
Outcome greedy_decode(const ArModel& model, const ConstraintAutomaton& constraint, int max_steps);

// Width-limited best-first search scored by exact prefix probability. Each
// round ranks all admissible one-token extensions (score descending, then
// token order) and keeps the top `width`; completions among them retire to
// the finished pool. Width 1 therefore reproduces greedy_decode exactly,
// and unbounded width is exhaustive.
Outcome beam_decode(const ArModel& model, const ConstraintAutomaton& constraint, int width,
                    int max_steps);

// Ancestral sampling until the constraint accepts. Conditional on success
// the draw is exactly the conditioned law; the cost is the attempt count.
Outcome rejection_sample(const ArModel& model, const ConstraintAutomaton& constraint,
                         int max_attempts, SplitMix64& rng, int max_steps);

// Zeroes locally inadmissible tokens, renormalizes, samples. Stepwise
// admissible by construction, but may dead-end, and its law over feasible
// outputs generally differs from the exact conditional.
Outcome masked_ancestral_sample(const ArModel& model, const ConstraintAutomaton& constraint,
                                SplitMix64& rng, int max_steps);

}  // namespace decoders
}  // namespace argen
