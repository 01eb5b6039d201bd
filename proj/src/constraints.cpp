#include "argen/constraints.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace argen {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("constraint, line " + std::to_string(line) + ": " + msg);
}

// Longest token count along any non-reject path from `initial`; empty if a
// cycle is reachable. Gray/black depth-first search with memoized depths.
struct PathScan {
  const std::vector<int>& transitions;
  int num_tokens;
  std::vector<int> color;  // 0 white, 1 gray, 2 black
  std::vector<int> depth;
  bool cyclic = false;

  void visit(int state) {
    color[state] = 1;
    int longest = 0;
    for (int t = 0; t < num_tokens && !cyclic; ++t) {
      const int target = transitions[state * num_tokens + t];
      if (target == ConstraintAutomaton::kReject) continue;
      if (color[target] == 1) {
        cyclic = true;
        return;
      }
      if (color[target] == 0) visit(target);
      if (cyclic) return;
      longest = std::max(longest, 1 + depth[target]);
    }
    depth[state] = longest;
    color[state] = 2;
  }
};

std::optional<int> longest_path(const std::vector<int>& transitions, int num_tokens,
                                int num_states, int initial) {
  PathScan scan{transitions, num_tokens, std::vector<int>(num_states, 0),
                std::vector<int>(num_states, 0)};
  scan.visit(initial);
  if (scan.cyclic) return std::nullopt;
  return scan.depth[initial];
}

}  // namespace

ConstraintAutomaton::ConstraintAutomaton(std::string description, int num_tokens, int num_states,
                                         int initial, std::vector<int> transitions,
                                         std::vector<bool> accepting, std::optional<Budget> budget)
    : description_(std::move(description)),
      num_tokens_(num_tokens),
      num_states_(num_states),
      initial_(initial),
      transitions_(std::move(transitions)),
      accepting_(std::move(accepting)),
      budget_(std::move(budget)) {
  if (num_tokens_ < 2) throw std::invalid_argument("constraint alphabet too small");
  if (num_states_ < 1) throw std::invalid_argument("constraint needs at least one state");
  if (initial_ < 0 || initial_ >= num_states_)
    throw std::invalid_argument("constraint initial state out of range");
  if (transitions_.size() != static_cast<std::size_t>(num_states_) * num_tokens_)
    throw std::invalid_argument("constraint transition table has the wrong shape");
  for (int target : transitions_) {
    if (target != kReject && (target < 0 || target >= num_states_))
      throw std::invalid_argument("constraint transition target out of range");
  }
  if (accepting_.size() != static_cast<std::size_t>(num_states_))
    throw std::invalid_argument("constraint accepting vector has the wrong shape");
  if (budget_ && budget_->weights.size() != static_cast<std::size_t>(num_tokens_))
    throw std::invalid_argument("budget weights must cover every token");
  length_bound_ = longest_path(transitions_, num_tokens_, num_states_, initial_);
}

std::optional<int> ConstraintAutomaton::implied_horizon(TokenId eos) const {
  if (length_bound_) return length_bound_;
  if (budget_) {
    bool positive = true;
    for (int t = 0; t < num_tokens_; ++t) {
      if (t != eos && budget_->weights[t] == 0) positive = false;
    }
    // Each non-eos token spends at least 1, so at most `target` of them.
    if (positive) return static_cast<int>(budget_->target) + 1;
  }
  return std::nullopt;
}

bool ConstraintAutomaton::dp_computable(TokenId eos) const {
  if (length_bound_) return true;
  if (!budget_) return false;
  for (int t = 0; t < num_tokens_; ++t) {
    if (t != eos && budget_->weights[t] == 0) return false;
  }
  return true;
}

namespace {

// States 0..n count consumed positions; state n is the sole accepting one.
ConstraintAutomaton position_automaton(const std::vector<std::vector<TokenId>>& allowed_sets,
                                       const Vocabulary& vocab, std::string description) {
  const int n = static_cast<int>(allowed_sets.size());
  if (n < 1) throw std::invalid_argument("positionwise constraint needs at least one position");
  const int tokens = vocab.size();
  std::vector<int> transitions((n + 1) * tokens, ConstraintAutomaton::kReject);
  for (int i = 0; i < n; ++i) {
    if (allowed_sets[i].empty())
      throw std::invalid_argument("positionwise constraint: empty set at position " +
                                  std::to_string(i + 1));
    for (TokenId t : allowed_sets[i]) {
      if (!vocab.contains(t))
        throw std::invalid_argument("positionwise constraint: token out of range");
      transitions[i * tokens + t] = i + 1;
    }
  }
  std::vector<bool> accepting(n + 1, false);
  accepting[n] = true;
  return ConstraintAutomaton(std::move(description), tokens, n + 1, 0, std::move(transitions),
                             std::move(accepting), std::nullopt);
}

}  // namespace

ConstraintAutomaton compile(const UnaryConstraint& c, const Vocabulary& vocab) {
  return position_automaton(c.allowed_sets, vocab,
                            "unary n=" + std::to_string(c.allowed_sets.size()));
}

ConstraintAutomaton compile(const FixedLengthConstraint& c, const Vocabulary& vocab) {
  if (c.length < 1) throw std::invalid_argument("fixed length must be >= 1");
  const int tokens = vocab.size();
  const int n = c.length;
  std::vector<int> transitions((n + 1) * tokens, ConstraintAutomaton::kReject);
  for (int i = 0; i + 1 < n; ++i) {
    for (TokenId t = 0; t < tokens; ++t) {
      if (!vocab.is_eos(t)) transitions[i * tokens + t] = i + 1;
    }
  }
  transitions[(n - 1) * tokens + vocab.eos()] = n;
  std::vector<bool> accepting(n + 1, false);
  accepting[n] = true;
  return ConstraintAutomaton("fixedlen L=" + std::to_string(n), tokens, n + 1, 0,
                             std::move(transitions), std::move(accepting), std::nullopt);
}

ConstraintAutomaton compile(const MetricalConstraint& c, const Vocabulary& vocab) {
  const int tokens = vocab.size();
  if (c.weights.size() != static_cast<std::size_t>(tokens))
    throw std::invalid_argument("metrical constraint must weight every token");
  // A single all-accepting state: the budget does all the work.
  std::vector<int> transitions(tokens, 0);
  return ConstraintAutomaton("metrical K=" + std::to_string(c.target), tokens, 1, 0,
                             std::move(transitions), {true},
                             Budget{c.weights, c.target});
}

ConstraintAutomaton compile(const InpaintingSpec& c, const Vocabulary& vocab) {
  const int L = c.total_length;
  const int nu = static_cast<int>(c.prefix.size());
  const int nv = static_cast<int>(c.suffix.size());
  if (L < 1) throw std::invalid_argument("inpainting total length must be >= 1");
  if (nu + nv > L)
    throw std::invalid_argument("inpainting: |prefix| + |suffix| = " + std::to_string(nu + nv) +
                                " exceeds total length " + std::to_string(L));
  for (TokenId t : c.prefix) {
    if (!vocab.contains(t) || vocab.is_eos(t))
      throw std::invalid_argument("inpainting prefix must be eos-free");
  }
  for (int i = 0; i < nv; ++i) {
    if (!vocab.contains(c.suffix[i])) throw std::invalid_argument("inpainting suffix token out of range");
    if (vocab.is_eos(c.suffix[i]) && i + 1 != nv)
      throw std::invalid_argument("inpainting suffix has interior eos");
  }
  if (nv > 0 && !vocab.is_eos(c.suffix.back()))
    throw std::invalid_argument(
        "inpainting suffix must end in eos (a complete sequence does), so no sequence "
        "can satisfy this constraint");
  if (nv == 0 && nu == L)
    throw std::invalid_argument("inpainting: prefix fills the whole length, leaving no eos");

  // Positionwise sets: prefix pins, middle is free non-eos, suffix pins, and
  // the last position is eos either way.
  std::vector<std::vector<TokenId>> allowed_sets(L);
  for (int i = 0; i < L; ++i) {
    auto& set = allowed_sets[i];
    if (i < nu) {
      set = {c.prefix[i]};
    } else if (i >= L - nv) {
      set = {c.suffix[i - (L - nv)]};
    } else if (i + 1 == L) {
      set = {vocab.eos()};
    } else {
      for (TokenId t = 0; t < vocab.size(); ++t) {
        if (!vocab.is_eos(t)) set.push_back(t);
      }
    }
  }
  return position_automaton(allowed_sets, vocab,
                            "inpaint L=" + std::to_string(L) + " |u|=" + std::to_string(nu) +
                                " |v|=" + std::to_string(nv));
}

bool accepts(const ConstraintAutomaton& automaton, const CompleteSequence& x) {
  int state = automaton.initial();
  std::uint64_t spent = 0;
  for (TokenId t : x.tokens()) {
    if (t < 0 || t >= automaton.num_tokens())
      throw std::invalid_argument("sequence token outside the constraint alphabet");
    state = automaton.step(state, t);
    if (state == ConstraintAutomaton::kReject) return false;
    if (automaton.budget()) spent += automaton.budget()->weights[t];
  }
  if (!automaton.accepting(state)) return false;
  if (automaton.budget() && spent != automaton.budget()->target) return false;
  return true;
}

long long product_size(const ConstraintAutomaton& automaton, const MarkovModel& model) {
  const long long budget_levels =
      automaton.budget() ? static_cast<long long>(automaton.budget()->target) + 1 : 1;
  return static_cast<long long>(model.num_states()) * automaton.num_states() * budget_levels;
}

ConstraintCursor start_cursor(const ConstraintAutomaton& automaton) {
  return {automaton.initial(), automaton.budget() ? automaton.budget()->target : 0};
}

bool admissible_step(const ConstraintAutomaton& automaton, const Vocabulary& vocab,
                     const ConstraintCursor& cursor, TokenId token) {
  const int next = automaton.step(cursor.state, token);
  if (next == ConstraintAutomaton::kReject) return false;
  if (!automaton.budget()) return vocab.is_eos(token) ? automaton.accepting(next) : true;
  const std::uint64_t w = automaton.budget()->weights[token];
  if (vocab.is_eos(token)) return automaton.accepting(next) && cursor.remaining == w;
  return w <= cursor.remaining;
}

ConstraintCursor advance_cursor(const ConstraintAutomaton& automaton,
                                const ConstraintCursor& cursor, TokenId token) {
  const int next = automaton.step(cursor.state, token);
  if (next == ConstraintAutomaton::kReject)
    throw std::logic_error("advance_cursor across a rejecting transition");
  std::uint64_t remaining = cursor.remaining;
  if (automaton.budget()) {
    const std::uint64_t w = automaton.budget()->weights[token];
    if (w > remaining) throw std::logic_error("advance_cursor past the budget");
    remaining -= w;
  }
  return {next, remaining};
}

namespace {

struct LineReader {
  std::istream& in;
  std::string line;
  int line_no = 0;

  bool next(bool required) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    if (required) fail(line_no, "unexpected end of file");
    return false;
  }
};

TokenId lookup_token(const Vocabulary& vocab, const std::string& label, int line_no) {
  const auto t = vocab.find(label);
  if (!t) fail(line_no, "unknown token '" + label + "'");
  return *t;
}

}  // namespace

ConstraintAutomaton parse_constraint(std::istream& in, const Vocabulary& vocab) {
  LineReader reader{in, {}, 0};
  reader.next(true);
  std::istringstream hs(reader.line);
  std::string tag;
  hs >> tag;

  if (tag == "unary") {
    int n = -1;
    if (!(hs >> n) || n < 1) fail(reader.line_no, "expected 'unary <n>' with n >= 1");
    UnaryConstraint c;
    for (int i = 0; i < n; ++i) {
      reader.next(true);
      std::istringstream ls(reader.line);
      std::vector<TokenId> set;
      std::string word;
      while (ls >> word) set.push_back(lookup_token(vocab, word, reader.line_no));
      if (set.empty()) fail(reader.line_no, "empty allowed set");
      c.allowed_sets.push_back(std::move(set));
    }
    return compile(c, vocab);
  }
  if (tag == "fixedlen") {
    int length = -1;
    if (!(hs >> length) || length < 1) fail(reader.line_no, "expected 'fixedlen <L>' with L >= 1");
    return compile(FixedLengthConstraint{length}, vocab);
  }
  if (tag == "metrical") {
    long long target = -1;
    if (!(hs >> target) || target < 0) fail(reader.line_no, "expected 'metrical <K>' with K >= 0");
    MetricalConstraint c;
    c.target = static_cast<std::uint64_t>(target);
    c.weights.assign(vocab.size(), 0);
    std::vector<bool> seen(vocab.size(), false);
    for (int i = 0; i < vocab.size(); ++i) {
      reader.next(true);
      std::istringstream ls(reader.line);
      std::string label;
      long long weight = -1;
      if (!(ls >> label >> weight) || weight < 0)
        fail(reader.line_no, "expected '<token> <weight>' with weight >= 0");
      const TokenId t = lookup_token(vocab, label, reader.line_no);
      if (seen[t]) fail(reader.line_no, "duplicate weight for token '" + label + "'");
      seen[t] = true;
      c.weights[t] = static_cast<std::uint64_t>(weight);
    }
    return compile(c, vocab);
  }
  if (tag == "inpaint") {
    int length = -1;
    if (!(hs >> length) || length < 1) fail(reader.line_no, "expected 'inpaint <L>' with L >= 1");
    InpaintingSpec c;
    c.total_length = length;
    for (const char* part : {"prefix", "suffix"}) {
      reader.next(true);
      std::istringstream ls(reader.line);
      std::string word;
      int count = -1;
      if (!(ls >> word >> count) || word != part || count < 0)
        fail(reader.line_no, std::string("expected '") + part + " <count> <tokens...>'");
      auto& target = (word == "prefix") ? c.prefix : c.suffix;
      for (int i = 0; i < count; ++i) {
        std::string label;
        if (!(ls >> label)) fail(reader.line_no, "fewer tokens than the declared count");
        target.push_back(lookup_token(vocab, label, reader.line_no));
      }
      if (ls >> word) fail(reader.line_no, "more tokens than the declared count");
    }
    return compile(c, vocab);
  }
  if (tag == "dfa") {
    int num_states = -1, initial = -1;
    if (!(hs >> num_states >> initial) || num_states < 1 || initial < 0 || initial >= num_states)
      fail(reader.line_no, "expected 'dfa <num-states> <initial>'");
    if (num_states > 100000) fail(reader.line_no, "dfa exceeds the 100000-state cap");
    reader.next(true);
    std::istringstream as(reader.line);
    std::string word;
    int count = -1;
    if (!(as >> word >> count) || word != "accepting" || count < 0)
      fail(reader.line_no, "expected 'accepting <count> <states...>'");
    std::vector<bool> accepting(num_states, false);
    for (int i = 0; i < count; ++i) {
      int s = -1;
      if (!(as >> s) || s < 0 || s >= num_states) fail(reader.line_no, "bad accepting state");
      accepting[s] = true;
    }
    std::vector<int> transitions(static_cast<std::size_t>(num_states) * vocab.size(),
                                 ConstraintAutomaton::kReject);
    while (reader.next(false)) {
      std::istringstream ts(reader.line);
      std::string kw, label;
      int from = -1, to = -1;
      if (!(ts >> kw >> from >> label >> to) || kw != "trans")
        fail(reader.line_no, "expected 'trans <from> <token> <to>'");
      if (from < 0 || from >= num_states || to < 0 || to >= num_states)
        fail(reader.line_no, "transition state out of range");
      const TokenId t = lookup_token(vocab, label, reader.line_no);
      auto& cell = transitions[static_cast<std::size_t>(from) * vocab.size() + t];
      if (cell != ConstraintAutomaton::kReject) fail(reader.line_no, "duplicate transition");
      cell = to;
    }
    return ConstraintAutomaton("dfa states=" + std::to_string(num_states), vocab.size(),
                               num_states, initial, std::move(transitions), std::move(accepting),
                               std::nullopt);
  }
  fail(reader.line_no, "unknown constraint tag '" + tag + "'");
}

ConstraintAutomaton parse_constraint_text(std::string_view text, const Vocabulary& vocab) {
  std::istringstream in{std::string(text)};
  return parse_constraint(in, vocab);
}

ConstraintAutomaton load_constraint_file(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open constraint file: " + path);
  return parse_constraint(in, vocab);
}

}  // namespace argen
