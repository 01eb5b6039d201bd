#include "argen/decoders.hpp"

#include <algorithm>
#include <stdexcept>

namespace argen {
namespace decoders {

Kind parse_kind(std::string_view name) {
  if (name == "greedy") return Kind::greedy;
  if (name == "beam") return Kind::beam;
  if (name == "rejection") return Kind::rejection;
  if (name == "masked") return Kind::masked_ancestral;
  if (name == "exact") return Kind::exact;
  throw std::invalid_argument("unknown decoder '" + std::string(name) +
                              "' (greedy|beam|rejection|masked|exact)");
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::greedy: return "greedy";
    case Kind::beam: return "beam";
    case Kind::rejection: return "rejection";
    case Kind::masked_ancestral: return "masked";
    case Kind::exact: return "exact";
  }
  throw std::logic_error("bad decoder kind");
}

void Config::validate() const {
  if (max_steps < 1) throw std::invalid_argument("decoder max_steps must be >= 1");
  if (kind == Kind::beam && beam_width < 1)
    throw std::invalid_argument("beam width must be >= 1");
  if (kind == Kind::rejection && max_attempts < 1)
    throw std::invalid_argument("rejection max_attempts must be >= 1");
}

std::string Config::id() const {
  std::string id = kind_name(kind);
  if (kind == Kind::beam) id += " width=" + std::to_string(beam_width);
  if (kind == Kind::rejection) id += " max_attempts=" + std::to_string(max_attempts);
  return id;
}

Outcome greedy_decode(const ArModel& model, const ConstraintAutomaton& constraint,
                      int max_steps) {
  if (max_steps < 1) throw std::invalid_argument("greedy_decode: max_steps must be >= 1");
  const Vocabulary& vocab = model.vocab();
  ConstraintCursor cursor = start_cursor(constraint);
  Outcome out;
  std::vector<TokenId> prefix;
  for (int step = 0; step < max_steps; ++step) {
    const auto row = model.next_token_distribution(prefix);
    TokenId best = -1;
    for (TokenId t = 0; t < vocab.size(); ++t) {
      if (row[t] == 0 || !admissible_step(constraint, vocab, cursor, t)) continue;
      if (best < 0 || row[t] > row[best]) best = t;  // ties fall to the lower index
    }
    if (best < 0) {
      out.fail = Outcome::Fail::dead_end;
      out.failure_prefix = std::move(prefix);
      return out;
    }
    prefix.push_back(best);
    if (vocab.is_eos(best)) {
      out.sequence = CompleteSequence(std::move(prefix), CompleteSequence::Unchecked{});
      return out;
    }
    cursor = advance_cursor(constraint, cursor, best);
  }
  out.fail = Outcome::Fail::step_limit;
  out.failure_prefix = std::move(prefix);
  return out;
}

namespace {

struct BeamItem {
  std::vector<TokenId> prefix;
  ConstraintCursor cursor;
  Rat score;
};

}  // namespace

Outcome beam_decode(const ArModel& model, const ConstraintAutomaton& constraint, int width,
                    int max_steps) {
  if (width < 1) throw std::invalid_argument("beam_decode: width must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("beam_decode: max_steps must be >= 1");
  const Vocabulary& vocab = model.vocab();
  std::vector<BeamItem> beam;
  beam.push_back({{}, start_cursor(constraint), Rat(1)});
  std::optional<std::pair<std::vector<TokenId>, Rat>> finished;

  auto offer_finished = [&](std::vector<TokenId> tokens, Rat score) {
    if (!finished || score > finished->second ||
        (score == finished->second && canonical_less_tokens(tokens, finished->first))) {
      finished = {std::move(tokens), std::move(score)};
    }
  };

  for (int step = 0; step < max_steps && !beam.empty(); ++step) {
    std::vector<BeamItem> extensions;
    for (const BeamItem& item : beam) {
      const auto row = model.next_token_distribution(item.prefix);
      for (TokenId t = 0; t < vocab.size(); ++t) {
        if (row[t] == 0 || !admissible_step(constraint, vocab, item.cursor, t)) continue;
        BeamItem ext;
        ext.prefix = item.prefix;
        ext.prefix.push_back(t);
        ext.score = item.score * row[t];
        if (!vocab.is_eos(t)) ext.cursor = advance_cursor(constraint, item.cursor, t);
        extensions.push_back(std::move(ext));
      }
    }
    // All extensions this round have equal length, so the canonical
    // tie-break reduces to lexicographic comparison.
    std::sort(extensions.begin(), extensions.end(), [](const BeamItem& a, const BeamItem& b) {
      if (a.score != b.score) return a.score > b.score;
      return std::lexicographical_compare(a.prefix.begin(), a.prefix.end(), b.prefix.begin(),
                                          b.prefix.end());
    });
    if (static_cast<int>(extensions.size()) > width) extensions.resize(width);
    beam.clear();
    for (BeamItem& ext : extensions) {
      if (vocab.is_eos(ext.prefix.back())) {
        offer_finished(std::move(ext.prefix), std::move(ext.score));
      } else {
        beam.push_back(std::move(ext));
      }
    }
  }

  Outcome out;
  if (finished) {
    out.sequence = CompleteSequence(std::move(finished->first), CompleteSequence::Unchecked{});
  } else {
    out.fail = beam.empty() ? Outcome::Fail::dead_end : Outcome::Fail::step_limit;
  }
  return out;
}

Outcome rejection_sample(const ArModel& model, const ConstraintAutomaton& constraint,
                         int max_attempts, SplitMix64& rng, int max_steps) {
  if (max_attempts < 1) throw std::invalid_argument("rejection_sample: max_attempts must be >= 1");
  Outcome out;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const AncestralResult draw = ancestral_sample(model, rng, max_steps);
    if (draw.sequence && accepts(constraint, *draw.sequence)) {
      out.sequence = draw.sequence;
      out.attempts = attempt;
      return out;
    }
  }
  out.fail = Outcome::Fail::exhausted;
  out.attempts = max_attempts;
  return out;
}

Outcome masked_ancestral_sample(const ArModel& model, const ConstraintAutomaton& constraint,
                                SplitMix64& rng, int max_steps) {
  if (max_steps < 1)
    throw std::invalid_argument("masked_ancestral_sample: max_steps must be >= 1");
  const Vocabulary& vocab = model.vocab();
  ConstraintCursor cursor = start_cursor(constraint);
  Outcome out;
  std::vector<TokenId> prefix;
  for (int step = 0; step < max_steps; ++step) {
    auto row = model.next_token_distribution(prefix);
    for (TokenId t = 0; t < vocab.size(); ++t) {
      if (!admissible_step(constraint, vocab, cursor, t)) row[t] = 0;
    }
    const auto sampler = CategoricalSampler::from_masses(row);
    if (sampler.empty()) {
      out.fail = Outcome::Fail::dead_end;
      out.failure_prefix = std::move(prefix);
      return out;
    }
    const TokenId t = static_cast<TokenId>(sampler.draw(rng));
    prefix.push_back(t);
    if (vocab.is_eos(t)) {
      out.sequence = CompleteSequence(std::move(prefix), CompleteSequence::Unchecked{});
      return out;
    }
    cursor = advance_cursor(constraint, cursor, t);
  }
  out.fail = Outcome::Fail::step_limit;
  out.failure_prefix = std::move(prefix);
  return out;
}

}  // namespace decoders
}  // namespace argen
