#include "argen/dynprog.hpp"

#include <sstream>
#include <stdexcept>

namespace argen {
namespace dynprog {

namespace {

constexpr int kMaxRecursionDepth = 1'000'000;

std::string describe_noncomputable(const ConstraintAutomaton& constraint, TokenId eos,
                                   const Vocabulary& vocab) {
  std::string msg =
      "constraint '" + constraint.description() +
      "' admits unbounded continuations: the automaton has a reachable cycle";
  if (constraint.budget()) {
    msg += " and the budget has zero-weight non-eos tokens (";
    bool first = true;
    for (int t = 0; t < constraint.num_tokens(); ++t) {
      if (t != eos && constraint.budget()->weights[t] == 0) {
        if (!first) msg += ", ";
        msg += vocab.label(t);
        first = false;
      }
    }
    msg += ")";
  } else {
    msg += " and no budget";
  }
  return msg + "; bound the length or give every non-eos token weight >= 1";
}

}  // namespace

ContinuationTable::ContinuationTable(const MarkovModel& model,
                                     const ConstraintAutomaton& constraint)
    : model_(&model), constraint_(&constraint) {
  if (constraint.num_tokens() != model.vocab().size())
    throw std::invalid_argument("constraint and model alphabets differ in size");
  const TokenId eos = model.vocab().eos();
  if (!constraint.dp_computable(eos))
    throw std::invalid_argument(describe_noncomputable(constraint, eos, model.vocab()));
  compute(initial(), 0);
  // Samplers for every memoized live state; the table never mutates after
  // this, so concurrent sampling needs no synchronization.
  for (const auto& [state, mass] : beta_) {
    if (mass == 0) continue;
    std::vector<Rat> masses(model.vocab().size());
    for (TokenId t = 0; t < model.vocab().size(); ++t) masses[t] = step_mass(state, t);
    samplers_.emplace(state, CategoricalSampler::from_masses(masses));
  }
}

ProductState ContinuationTable::initial() const {
  return ProductState{model_->initial_state(), constraint_->initial(),
                      constraint_->budget() ? constraint_->budget()->target : 0};
}

const Rat& ContinuationTable::beta(const ProductState& s) const {
  const auto it = beta_.find(s);
  if (it == beta_.end()) throw std::out_of_range("beta: state was never reachable");
  return it->second;
}

std::optional<ProductState> ContinuationTable::step(const ProductState& s, TokenId token) const {
  const Vocabulary& vocab = model_->vocab();
  if (vocab.is_eos(token)) throw std::invalid_argument("step: eos ends the sequence");
  const int as = constraint_->step(s.automaton_state, token);
  if (as == ConstraintAutomaton::kReject) return std::nullopt;
  std::uint64_t budget_left = s.budget_left;
  if (constraint_->budget()) {
    const std::uint64_t w = constraint_->budget()->weights[token];
    if (w > budget_left) return std::nullopt;
    budget_left -= w;
  }
  return ProductState{model_->transition(s.model_state, token), as, budget_left};
}

Rat ContinuationTable::step_mass(const ProductState& s, TokenId token) const {
  const Vocabulary& vocab = model_->vocab();
  const Rat& p = model_->row(s.model_state)[token];
  if (p == 0) return Rat(0);
  if (vocab.is_eos(token)) {
    const int as = constraint_->step(s.automaton_state, token);
    if (as == ConstraintAutomaton::kReject || !constraint_->accepting(as)) return Rat(0);
    if (constraint_->budget() && s.budget_left != constraint_->budget()->weights[token])
      return Rat(0);
    return p;
  }
  const auto next = step(s, token);
  if (!next) return Rat(0);
  const auto it = beta_.find(*next);
  if (it == beta_.end() || it->second == 0) return Rat(0);
  return p * it->second;
}

const Rat& ContinuationTable::compute(const ProductState& s, int depth) {
  if (depth > kMaxRecursionDepth)
    throw std::logic_error("continuation recursion did not terminate");
  const auto it = beta_.find(s);
  if (it != beta_.end()) return it->second;
  const Vocabulary& vocab = model_->vocab();
  Rat total = 0;
  for (TokenId t = 0; t < vocab.size(); ++t) {
    const Rat& p = model_->row(s.model_state)[t];
    if (p == 0) continue;
    if (vocab.is_eos(t)) {
      const int as = constraint_->step(s.automaton_state, t);
      if (as == ConstraintAutomaton::kReject || !constraint_->accepting(as)) continue;
      if (constraint_->budget() && s.budget_left != constraint_->budget()->weights[t]) continue;
      total += p;
    } else {
      const auto next = step(s, t);
      if (!next) continue;
      total += p * compute(*next, depth + 1);
    }
  }
  return beta_.emplace(s, std::move(total)).first->second;
}

const CategoricalSampler& ContinuationTable::sampler(const ProductState& s) const {
  const auto it = samplers_.find(s);
  if (it == samplers_.end()) throw std::out_of_range("sampler: state has no continuation mass");
  return it->second;
}

std::string ContinuationTable::serialize() const {
  std::ostringstream out;
  for (const auto& [state, mass] : beta_) {
    out << "state ctx=[" << model_->vocab().render(model_->state_context(state.model_state))
        << "] automaton=" << state.automaton_state;
    if (constraint_->budget()) out << " budget=" << state.budget_left;
    out << " beta " << fraction_string(mass) << '\n';
  }
  return out.str();
}

Rat exact_z(const MarkovModel& model, const ConstraintAutomaton& constraint) {
  return ContinuationTable(model, constraint).z();
}

CompleteSequence exact_constrained_sample(const ContinuationTable& table, SplitMix64& rng) {
  if (table.z() == 0)
    throw std::invalid_argument("exact_constrained_sample: the feasible set has mass zero");
  const Vocabulary& vocab = table.model().vocab();
  ProductState state = table.initial();
  std::vector<TokenId> tokens;
  for (;;) {
    const TokenId t = static_cast<TokenId>(table.sampler(state).draw(rng));
    tokens.push_back(t);
    if (vocab.is_eos(t)) return CompleteSequence(std::move(tokens), CompleteSequence::Unchecked{});
    state = *table.step(state, t);
  }
}

namespace {

struct ViterbiSolver {
  const MarkovModel& model;
  const ConstraintAutomaton& constraint;
  // Best completion from each state: probability product and the canonical
  // minimum among equal-probability completions. Monostate = infeasible.
  std::map<ProductState, std::optional<std::pair<Rat, std::vector<TokenId>>>> memo;

  const std::optional<std::pair<Rat, std::vector<TokenId>>>& solve(const ProductState& s) {
    const auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const Vocabulary& vocab = model.vocab();
    std::optional<std::pair<Rat, std::vector<TokenId>>> best;
    for (TokenId t = 0; t < vocab.size(); ++t) {
      const Rat& p = model.row(s.model_state)[t];
      if (p == 0) continue;
      std::optional<std::pair<Rat, std::vector<TokenId>>> candidate;
      if (vocab.is_eos(t)) {
        const int as = constraint.step(s.automaton_state, t);
        if (as == ConstraintAutomaton::kReject || !constraint.accepting(as)) continue;
        if (constraint.budget() && s.budget_left != constraint.budget()->weights[t]) continue;
        candidate = {p, {t}};
      } else {
        ProductState next{0, 0, 0};
        const int as = constraint.step(s.automaton_state, t);
        if (as == ConstraintAutomaton::kReject) continue;
        std::uint64_t budget_left = s.budget_left;
        if (constraint.budget()) {
          const std::uint64_t w = constraint.budget()->weights[t];
          if (w > budget_left) continue;
          budget_left -= w;
        }
        next = ProductState{model.transition(s.model_state, t), as, budget_left};
        const auto& sub = solve(next);
        if (!sub) continue;
        std::vector<TokenId> completion;
        completion.reserve(1 + sub->second.size());
        completion.push_back(t);
        completion.insert(completion.end(), sub->second.begin(), sub->second.end());
        candidate = {p * sub->first, std::move(completion)};
      }
      if (!best || candidate->first > best->first ||
          (candidate->first == best->first &&
           canonical_less_tokens(candidate->second, best->second))) {
        best = std::move(candidate);
      }
    }
    return memo.emplace(s, std::move(best)).first->second;
  }
};

}  // namespace

std::optional<std::pair<CompleteSequence, Rat>> viterbi_map(
    const MarkovModel& model, const ConstraintAutomaton& constraint) {
  if (constraint.num_tokens() != model.vocab().size())
    throw std::invalid_argument("constraint and model alphabets differ in size");
  if (!constraint.dp_computable(model.vocab().eos()))
    throw std::invalid_argument(
        describe_noncomputable(constraint, model.vocab().eos(), model.vocab()));
  ViterbiSolver solver{model, constraint, {}};
  const ProductState start{model.initial_state(), constraint.initial(),
                           constraint.budget() ? constraint.budget()->target : 0};
  const auto& best = solver.solve(start);
  if (!best) return std::nullopt;
  return std::make_pair(CompleteSequence(best->second, CompleteSequence::Unchecked{}),
                        best->first);
}

namespace {

void collect_feasible(const ContinuationTable& table, const ProductState& state,
                      std::vector<TokenId>& prefix, const Rat& mass,
                      std::vector<std::pair<CompleteSequence, Rat>>& out,
                      std::size_t max_sequences) {
  const Vocabulary& vocab = table.model().vocab();
  for (TokenId t = 0; t < vocab.size(); ++t) {
    if (table.step_mass(state, t) == 0) continue;
    const Rat& p = table.model().row(state.model_state)[t];
    prefix.push_back(t);
    if (vocab.is_eos(t)) {
      if (out.size() >= max_sequences)
        throw std::length_error("enumerate_feasible: more than " +
                                std::to_string(max_sequences) + " feasible sequences");
      out.emplace_back(CompleteSequence(prefix, CompleteSequence::Unchecked{}), mass * p);
    } else {
      collect_feasible(table, *table.step(state, t), prefix, mass * p, out, max_sequences);
    }
    prefix.pop_back();
  }
}

}  // namespace

std::vector<std::pair<CompleteSequence, Rat>> enumerate_feasible(const ContinuationTable& table,
                                                                 std::size_t max_sequences) {
  std::vector<std::pair<CompleteSequence, Rat>> out;
  if (table.z() == 0) return out;
  std::vector<TokenId> prefix;
  collect_feasible(table, table.initial(), prefix, Rat(1), out, max_sequences);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
  for (auto& entry : out) entry.second /= table.z();
  return out;
}

}  // namespace dynprog
}  // namespace argen
