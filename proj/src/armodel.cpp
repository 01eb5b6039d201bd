#include "argen/armodel.hpp"

#include "argen/markov.hpp"

#include <stdexcept>

namespace argen {

std::vector<Rat> ArModel::next_token_distribution(std::span<const TokenId> prefix) const {
  const Vocabulary& v = vocab();
  for (TokenId t : prefix) {
    if (!v.contains(t)) throw std::invalid_argument("prefix token out of range");
    if (v.is_eos(t)) throw std::invalid_argument("prefix contains eos");
  }
  return conditional_row(prefix);
}

Rat sequence_probability(const ArModel& model, const CompleteSequence& x) {
  const auto& tokens = x.tokens();
  Rat p = 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto row =
        model.next_token_distribution(std::span<const TokenId>(tokens.data(), i));
    p *= row[tokens[i]];
    if (p == 0) break;
  }
  return p;
}

AncestralResult ancestral_sample(const ArModel& model, SplitMix64& rng, int max_steps) {
  if (max_steps < 1) throw std::invalid_argument("ancestral_sample: max_steps must be >= 1");
  const Vocabulary& v = model.vocab();
  AncestralResult result;

  // Markov tables carry prebuilt per-state samplers; walking states directly
  // skips the per-step row copy and integerization.
  if (const auto* markov = dynamic_cast<const MarkovModel*>(&model)) {
    int state = markov->initial_state();
    for (int step = 0; step < max_steps; ++step) {
      const TokenId t = static_cast<TokenId>(markov->row_sampler(state).draw(rng));
      result.prefix.push_back(t);
      if (v.is_eos(t)) {
        result.sequence = CompleteSequence(result.prefix, CompleteSequence::Unchecked{});
        return result;
      }
      state = markov->transition(state, t);
    }
    return result;
  }

  for (int step = 0; step < max_steps; ++step) {
    const auto row = model.next_token_distribution(result.prefix);
    const auto sampler = CategoricalSampler::from_masses(row);
    const TokenId t = static_cast<TokenId>(sampler.draw(rng));
    result.prefix.push_back(t);
    if (v.is_eos(t)) {
      result.sequence = CompleteSequence(result.prefix, CompleteSequence::Unchecked{});
      return result;
    }
  }
  return result;  // overflow: eos not reached
}

}  // namespace argen
