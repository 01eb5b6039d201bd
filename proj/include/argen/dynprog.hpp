#pragma once

#include "argen/constraints.hpp"
#include "argen/markov.hpp"
#include "argen/oracle.hpp"

#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

namespace argen {

// Exact constrained inference for bounded-state models: backward
// continuation masses, exact conditional sampling, and max-product MAP on
// the product of Markov context state, automaton state, and remaining
// budget. Requires a constraint the recursion terminates on (see
// ConstraintAutomaton::dp_computable); anything else is rejected loudly.
namespace dynprog {

struct ProductState {
  int model_state = 0;
  int automaton_state = 0;
  std::uint64_t budget_left = 0;  // meaningful only when the constraint has a budget

  auto key() const { return std::tie(model_state, automaton_state, budget_left); }
  bool operator==(const ProductState&) const = default;
  bool operator<(const ProductState& other) const { return key() < other.key(); }
};

// beta(s) is the exact probability that continuing generation from s yields
// a complete sequence satisfying the constraint:
//   beta(s) = sum_a P(a | model state) * beta(step(s, a)),
// with emitting eos contributing P(eos) exactly when it lands accepting
// with the budget exactly consumed. Immutable once built; sampling with
// independent generators may share one table.
class ContinuationTable {
 public:
  ContinuationTable(const MarkovModel& model, const ConstraintAutomaton& constraint);

  const MarkovModel& model() const { return *model_; }
  const ConstraintAutomaton& constraint() const { return *constraint_; }

  ProductState initial() const;
  const Rat& beta(const ProductState& s) const;
  Rat z() const { return beta(initial()); }

  // The product-state transition on a non-eos token; empty when the
  // automaton rejects or the budget is overshot.
  std::optional<ProductState> step(const ProductState& s, TokenId token) const;

  // Mass the token contributes at s: P(eos)*[acceptable] for eos,
  // P(a)*beta(step(s, a)) otherwise. Step masses at s sum to beta(s).
  Rat step_mass(const ProductState& s, TokenId token) const;

  // Sampler over the step masses at s; defined for states with beta > 0.
  const CategoricalSampler& sampler(const ProductState& s) const;

  // Text dump (state, beta as p/q), one line per memoized state.
  std::string serialize() const;

 private:
  const Rat& compute(const ProductState& s, int depth);

  const MarkovModel* model_;
  const ConstraintAutomaton* constraint_;
  std::map<ProductState, Rat> beta_;
  std::map<ProductState, CategoricalSampler> samplers_;
};

// The constrained normalization constant: beta at the initial product state.
Rat exact_z(const MarkovModel& model, const ConstraintAutomaton& constraint);

// One draw distributed exactly as P(. | feasible): token a is taken with
// probability P(a|state) * beta(next) / beta(current). Requires z > 0.
CompleteSequence exact_constrained_sample(const ContinuationTable& table, SplitMix64& rng);

// Exact argmax of P over the feasible set, canonical tie-breaking identical
// to oracle::exact_map; empty when Z = 0.
std::optional<std::pair<CompleteSequence, Rat>> viterbi_map(const MarkovModel& model,
                                                            const ConstraintAutomaton& constraint);

// All feasible sequences with their conditional probabilities P(x)/Z, in
// canonical order, by walking positive step masses. Refuses (throws
// std::length_error) past max_sequences.
std::vector<std::pair<CompleteSequence, Rat>> enumerate_feasible(
    const ContinuationTable& table, std::size_t max_sequences = 1'000'000);

}  // namespace dynprog
}  // namespace argen
