#include "argen/oracle.hpp"

#include <algorithm>

namespace argen {
namespace oracle {

BudgetExceededError::BudgetExceededError(long long visited_, long long budget_, int horizon,
                                         int vocab_size)
    : std::runtime_error("enumeration budget exceeded: visited " + std::to_string(visited_) +
                         " prefixes with budget " + std::to_string(budget_) +
                         "; the worst case for horizon " + std::to_string(horizon) + " over " +
                         std::to_string(vocab_size) + " tokens is ~" +
                         std::to_string(vocab_size) + "^" + std::to_string(horizon) +
                         " prefixes; lower the horizon or raise the budget"),
      visited(visited_),
      budget(budget_) {}

namespace {

struct Enumerator {
  const ArModel& model;
  const int horizon;
  const Limits& limits;
  long long visited = 0;
  std::vector<TokenId> prefix;
  std::vector<std::pair<CompleteSequence, Rat>> entries;
  Rat residual = 0;

  // Depth-first over positive-probability prefixes. A prefix of length d can
  // still finish within the horizon iff d <= horizon - 1.
  void walk(const Rat& mass) {
    if (++visited > limits.max_visited_prefixes)
      throw BudgetExceededError(visited, limits.max_visited_prefixes, horizon,
                                model.vocab().size());
    const auto row = model.next_token_distribution(prefix);
    const TokenId eos = model.vocab().eos();
    if (row[eos] > 0) {
      prefix.push_back(eos);
      entries.emplace_back(CompleteSequence(prefix, CompleteSequence::Unchecked{}),
                           mass * row[eos]);
      prefix.pop_back();
    }
    const bool can_extend = static_cast<int>(prefix.size()) < horizon - 1;
    for (TokenId t = 0; t < model.vocab().size(); ++t) {
      if (t == eos || row[t] == 0) continue;
      const Rat branch = mass * row[t];
      if (!can_extend) {
        residual += branch;
        continue;
      }
      prefix.push_back(t);
      walk(branch);
      prefix.pop_back();
    }
  }
};

}  // namespace

EnumeratedSupport enumerate_support(const ArModel& model, int horizon, const Limits& limits) {
  if (horizon < 1) throw std::invalid_argument("enumerate_support: horizon must be >= 1");
  Enumerator e{model, horizon, limits, 0, {}, {}, Rat(0)};
  e.walk(Rat(1));
  std::sort(e.entries.begin(), e.entries.end(),
            [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
  return EnumeratedSupport{std::move(e.entries), horizon, std::move(e.residual)};
}

std::optional<std::pair<CompleteSequence, Rat>> exact_map(const ArModel& model, int horizon,
                                                          const ConstraintAutomaton* constraint,
                                                          const Limits& limits) {
  const auto support = enumerate_support(model, horizon, limits);
  const std::pair<CompleteSequence, Rat>* best = nullptr;
  for (const auto& entry : support.entries) {
    if (constraint && !accepts(*constraint, entry.first)) continue;
    if (!best || entry.second > best->second) best = &entry;  // canonical order: first max wins
  }
  if (!best) return std::nullopt;
  return *best;
}

std::optional<std::pair<CompleteSequence, Rat>> best_of_length(const ArModel& model, int length,
                                                               const Limits& limits) {
  if (length < 1) throw std::invalid_argument("best_of_length: length must be >= 1");
  const auto support = enumerate_support(model, length, limits);
  const std::pair<CompleteSequence, Rat>* best = nullptr;
  for (const auto& entry : support.entries) {
    if (static_cast<int>(entry.first.length()) != length) continue;
    if (!best || entry.second > best->second) best = &entry;
  }
  if (!best) return std::nullopt;
  return *best;
}

bool map_threshold(const ArModel& model, int length, const Rat& tau, int horizon,
                   const Limits& limits) {
  if (length < 1) throw std::invalid_argument("map_threshold: length must be >= 1");
  if (horizon < length) throw std::invalid_argument("map_threshold: horizon must be >= length");
  if (tau < 0) throw std::invalid_argument("map_threshold: tau must be >= 0");
  // A length-n complete sequence always exists, so tau = 0 is trivially met.
  if (tau == 0) return true;
  const auto best = best_of_length(model, length, limits);
  return best && best->second >= tau;
}

bool certificate_check(const ArModel& model, const CompleteSequence& x, const Rat& tau) {
  return sequence_probability(model, x) >= tau;
}

std::optional<ConditionalDistribution> exact_conditional(const ArModel& model,
                                                         const ConstraintAutomaton& constraint,
                                                         std::optional<int> horizon,
                                                         const Limits& limits) {
  std::optional<int> bound = horizon;
  if (!bound) bound = constraint.implied_horizon(model.vocab().eos());
  if (!bound)
    throw std::invalid_argument(
        "exact_conditional: the constraint does not bound sequence length; supply a horizon");
  if (*bound < 1) return std::nullopt;
  const auto support = enumerate_support(model, *bound, limits);
  ConditionalDistribution result;
  for (const auto& entry : support.entries) {
    if (!accepts(constraint, entry.first)) continue;
    result.support.push_back(entry);
    result.normalizer += entry.second;
  }
  if (result.normalizer == 0) return std::nullopt;
  for (auto& entry : result.support) entry.second /= result.normalizer;
  return result;
}

}  // namespace oracle
}  // namespace argen
