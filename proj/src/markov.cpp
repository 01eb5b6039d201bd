#include "argen/markov.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace argen {

namespace {

constexpr long long kMaxStates = 200000;

long long expected_state_count(int non_eos, int order) {
  long long total = 0, level = 1;
  for (int d = 0; d <= order; ++d) {
    total += level;
    if (total > kMaxStates) return total;
    level *= non_eos;
  }
  return total;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("markov model, line " + std::to_string(line) + ": " + msg);
}

}  // namespace

MarkovModel::MarkovModel(Vocabulary vocab, int order,
                         std::map<std::vector<TokenId>, std::vector<Rat>> rows)
    : vocab_(std::move(vocab)), order_(order) {
  if (order_ < 0) throw std::invalid_argument("markov order must be >= 0");
  const int non_eos = vocab_.size() - 1;
  const long long expected = expected_state_count(non_eos, order_);
  if (expected > kMaxStates)
    throw std::invalid_argument("markov state space too large (" + std::to_string(expected) +
                                " contexts)");
  if (static_cast<long long>(rows.size()) != expected)
    throw std::invalid_argument("markov model must list every non-eos context of length <= " +
                                std::to_string(order_) + ": expected " +
                                std::to_string(expected) + " states, got " +
                                std::to_string(rows.size()));
  for (auto& [context, row] : rows) {
    if (static_cast<int>(context.size()) > order_)
      throw std::invalid_argument("markov context longer than the order");
    for (TokenId t : context) {
      if (!vocab_.contains(t)) throw std::invalid_argument("markov context token out of range");
      if (vocab_.is_eos(t)) throw std::invalid_argument("markov context contains eos");
    }
    if (static_cast<int>(row.size()) != vocab_.size())
      throw std::invalid_argument("markov row width must equal vocabulary size");
    Rat sum = 0;
    for (const Rat& p : row) {
      if (p < 0) throw std::invalid_argument("negative probability in markov row");
      sum += p;
    }
    if (sum != 1)
      throw std::invalid_argument("markov row for context '" + vocab_.render(context) +
                                  "' sums to " + fraction_string(sum) + ", not 1");
  }

  contexts_.reserve(rows.size());
  for (auto& [context, row] : rows) contexts_.push_back(context);
  std::sort(contexts_.begin(), contexts_.end(),
            [](const auto& a, const auto& b) { return canonical_less_tokens(a, b); });
  rows_.reserve(contexts_.size());
  for (const auto& context : contexts_) rows_.push_back(std::move(rows.at(context)));

  transitions_.assign(contexts_.size(), std::vector<int>(vocab_.size(), -1));
  for (int s = 0; s < num_states(); ++s) {
    for (TokenId t = 0; t < vocab_.size(); ++t) {
      if (vocab_.is_eos(t)) continue;
      std::vector<TokenId> next = contexts_[s];
      next.push_back(t);
      if (static_cast<int>(next.size()) > order_)
        next.erase(next.begin(), next.end() - order_);
      transitions_[s][t] = context_index(next);
    }
  }

  samplers_.reserve(rows_.size());
  for (const auto& row : rows_) samplers_.push_back(CategoricalSampler::from_masses(row));
}

std::span<const TokenId> MarkovModel::state_context(int state) const {
  return contexts_.at(state);
}

int MarkovModel::context_index(std::span<const TokenId> context) const {
  const auto it = std::lower_bound(
      contexts_.begin(), contexts_.end(), context,
      [](const auto& a, std::span<const TokenId> b) { return canonical_less_tokens(a, b); });
  if (it == contexts_.end() || it->size() != context.size() ||
      !std::equal(it->begin(), it->end(), context.begin()))
    throw std::logic_error("markov context not found: " + vocab_.render(context));
  return static_cast<int>(it - contexts_.begin());
}

int MarkovModel::state_for_prefix(std::span<const TokenId> prefix) const {
  const std::size_t keep = std::min<std::size_t>(prefix.size(), order_);
  return context_index(prefix.subspan(prefix.size() - keep));
}

int MarkovModel::transition(int state, TokenId token) const {
  if (vocab_.is_eos(token)) throw std::invalid_argument("no markov transition on eos");
  return transitions_.at(state).at(token);
}

std::vector<Rat> MarkovModel::conditional_row(std::span<const TokenId> prefix) const {
  return rows_[state_for_prefix(prefix)];
}

MarkovModel MarkovModel::parse(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_content_line = [&](bool required) -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    if (required) fail(line_no, "unexpected end of file");
    return false;
  };

  next_content_line(true);
  std::istringstream header(line);
  std::string tag;
  int order = -1, vocab_size = -1;
  if (!(header >> tag >> order >> vocab_size) || tag != "markov")
    fail(line_no, "expected header 'markov <order> <vocab-size>'");
  if (order < 0) fail(line_no, "order must be >= 0");
  if (vocab_size < 2) fail(line_no, "vocabulary needs at least 2 tokens");

  std::vector<std::string> labels;
  int eos_index = -1;
  for (int i = 0; i < vocab_size; ++i) {
    next_content_line(true);
    std::istringstream ls(line);
    std::string label, marker;
    if (!(ls >> label)) fail(line_no, "expected a token label");
    if (ls >> marker) {
      if (marker != "eos") fail(line_no, "unknown token marker '" + marker + "'");
      if (eos_index >= 0) fail(line_no, "second eos marker");
      eos_index = i;
    }
    labels.push_back(label);
  }
  if (eos_index < 0) fail(line_no, "no token marked eos");
  Vocabulary vocab(std::move(labels), eos_index);

  std::map<std::vector<TokenId>, std::vector<Rat>> rows;
  while (next_content_line(false)) {
    const auto bar = line.find('|');
    if (bar == std::string::npos) fail(line_no, "state line needs a '|' separator");
    std::istringstream ctx_in(line.substr(0, bar));
    std::vector<TokenId> context;
    std::string word;
    while (ctx_in >> word) {
      const auto t = vocab.find(word);
      if (!t) fail(line_no, "unknown token '" + word + "' in context");
      context.push_back(*t);
    }
    std::istringstream row_in(line.substr(bar + 1));
    std::vector<Rat> row;
    while (row_in >> word) {
      try {
        row.push_back(parse_rational(word));
      } catch (const std::invalid_argument& e) {
        fail(line_no, e.what());
      }
    }
    if (static_cast<int>(row.size()) != vocab.size())
      fail(line_no, "expected " + std::to_string(vocab.size()) + " probabilities, got " +
                        std::to_string(row.size()));
    if (!rows.emplace(std::move(context), std::move(row)).second)
      fail(line_no, "duplicate state line");
  }

  try {
    return MarkovModel(std::move(vocab), order, std::move(rows));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("markov model: ") + e.what());
  }
}

MarkovModel MarkovModel::parse_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

MarkovModel MarkovModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  return parse(in);
}

std::string MarkovModel::serialize() const {
  std::ostringstream out;
  out << "markov " << order_ << ' ' << vocab_.size() << '\n';
  for (TokenId t = 0; t < vocab_.size(); ++t) {
    out << vocab_.label(t);
    if (vocab_.is_eos(t)) out << " eos";
    out << '\n';
  }
  for (int s = 0; s < num_states(); ++s) {
    out << vocab_.render(contexts_[s]) << (contexts_[s].empty() ? "|" : " |");
    for (const Rat& p : rows_[s]) out << ' ' << fraction_string(p);
    out << '\n';
  }
  return out.str();
}

}  // namespace argen
