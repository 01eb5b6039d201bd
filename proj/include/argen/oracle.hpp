#pragma once

#include "argen/armodel.hpp"
#include "argen/constraints.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace argen {

// Deliberately the naive exact baseline: bounded depth-first enumeration of
// complete sequences, pruning zero-probability branches. Ground truth for
// MAP, thresholds, normalization constants, and conditional distributions
// at desk scale.
namespace oracle {

struct Limits {
  long long max_visited_prefixes = 10'000'000;
};

class BudgetExceededError : public std::runtime_error {
 public:
  BudgetExceededError(long long visited, long long budget, int horizon, int vocab_size);
  long long visited;
  long long budget;
};

// Every positive-probability complete sequence of length <= horizon, in
// canonical order, plus the exact mass still alive past the horizon.
// Entry mass + residual_mass == 1 exactly.
struct EnumeratedSupport {
  std::vector<std::pair<CompleteSequence, Rat>> entries;
  int horizon = 0;
  Rat residual_mass;
};

// A law conditioned on a feasible set: support probabilities are exact and
// sum to 1; each entry times the normalizer recovers the unconditional
// probability.
struct ConditionalDistribution {
  std::vector<std::pair<CompleteSequence, Rat>> support;
  Rat normalizer;
};

EnumeratedSupport enumerate_support(const ArModel& model, int horizon, const Limits& limits = {});

// Most probable enumerated sequence (feasible under the constraint when one
// is given), ties broken canonically; empty when no feasible sequence has
// positive probability.
std::optional<std::pair<CompleteSequence, Rat>> exact_map(
    const ArModel& model, int horizon, const ConstraintAutomaton* constraint = nullptr,
    const Limits& limits = {});

// Most probable complete sequence of length exactly `length`.
std::optional<std::pair<CompleteSequence, Rat>> best_of_length(const ArModel& model, int length,
                                                               const Limits& limits = {});

// Does some complete sequence of length exactly `length` have probability
// >= tau? Exact comparison; horizon must be >= length.
bool map_threshold(const ArModel& model, int length, const Rat& tau, int horizon,
                   const Limits& limits = {});

// The polynomial-time certificate verifier: sequence_probability(x) >= tau.
bool certificate_check(const ArModel& model, const CompleteSequence& x, const Rat& tau);

// Exact conditional law given the constraint. The horizon defaults to the
// constraint's implied bound and must be supplied when there is none.
// Empty result means Z = 0 (infeasible).
std::optional<ConditionalDistribution> exact_conditional(const ArModel& model,
                                                         const ConstraintAutomaton& constraint,
                                                         std::optional<int> horizon = {},
                                                         const Limits& limits = {});

}  // namespace oracle
}  // namespace argen
