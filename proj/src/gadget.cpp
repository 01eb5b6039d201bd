#include "argen/gadget.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace argen {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("dimacs, line " + std::to_string(line) + ": " + msg);
}

}  // namespace

CnfFormula::CnfFormula(int num_vars, std::vector<std::vector<int>> clauses)
    : num_vars_(num_vars), clauses_(std::move(clauses)) {
  if (num_vars_ < 0) throw std::invalid_argument("num_vars must be >= 0");
  for (const auto& clause : clauses_) {
    if (clause.empty()) throw std::invalid_argument("empty clause");
    for (int lit : clause) {
      const int var = std::abs(lit);
      if (lit == 0 || var < 1 || var > num_vars_)
        throw std::invalid_argument("literal " + std::to_string(lit) +
                                    " out of range for " + std::to_string(num_vars_) +
                                    " variables");
    }
  }
}

CnfFormula parse_dimacs(std::istream& in) {
  std::string line;
  int line_no = 0;
  int num_vars = -1, num_clauses = -1;
  std::vector<std::vector<int>> clauses;
  std::vector<int> current;
  int current_start_line = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == 'c') continue;
    if (line[first] == 'p') {
      if (num_vars >= 0) fail(line_no, "second problem line");
      std::istringstream ps(line);
      std::string p, fmt;
      if (!(ps >> p >> fmt >> num_vars >> num_clauses) || fmt != "cnf")
        fail(line_no, "expected 'p cnf <vars> <clauses>'");
      if (num_vars < 0 || num_clauses < 0) fail(line_no, "negative counts in problem line");
      continue;
    }
    if (num_vars < 0) fail(line_no, "clause before the problem line");
    std::istringstream ls(line);
    std::string word;
    while (ls >> word) {
      int lit = 0;
      try {
        std::size_t used = 0;
        lit = std::stoi(word, &used);
        if (used != word.size()) throw std::invalid_argument(word);
      } catch (const std::exception&) {
        fail(line_no, "bad literal '" + word + "'");
      }
      if (lit == 0) {
        if (current.empty()) fail(line_no, "empty clause");
        clauses.push_back(std::move(current));
        current.clear();
      } else {
        if (std::abs(lit) > num_vars)
          fail(line_no, "literal " + std::to_string(lit) + " out of range (" +
                            std::to_string(num_vars) + " variables)");
        if (current.empty()) current_start_line = line_no;
        current.push_back(lit);
      }
    }
  }
  if (num_vars < 0) fail(line_no, "missing problem line");
  if (!current.empty())
    fail(current_start_line, "clause not terminated by 0");
  if (static_cast<int>(clauses.size()) != num_clauses)
    fail(line_no, "header promises " + std::to_string(num_clauses) + " clauses, found " +
                      std::to_string(clauses.size()));
  return CnfFormula(num_vars, std::move(clauses));
}

CnfFormula parse_dimacs_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in);
}

CnfFormula load_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dimacs file: " + path);
  return parse_dimacs(in);
}

bool satisfies(const CnfFormula& f, std::span<const std::uint8_t> assignment) {
  if (static_cast<int>(assignment.size()) != f.num_vars())
    throw std::invalid_argument("assignment length " + std::to_string(assignment.size()) +
                                " != num_vars " + std::to_string(f.num_vars()));
  for (const auto& clause : f.clauses()) {
    bool satisfied = false;
    for (int lit : clause) {
      const bool value = assignment[std::abs(lit) - 1] != 0;
      if ((lit > 0) == value) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) return false;
  }
  return true;
}

std::uint64_t count_models_bruteforce(const CnfFormula& f, int max_vars) {
  const int m = f.num_vars();
  if (m > max_vars)
    throw std::invalid_argument("count_models_bruteforce: " + std::to_string(m) +
                                " variables exceeds the enumeration limit of " +
                                std::to_string(max_vars));
  std::vector<std::uint8_t> assignment(m, 0);
  std::uint64_t count = 0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << m); ++bits) {
    for (int i = 0; i < m; ++i) assignment[i] = (bits >> i) & 1;
    if (satisfies(f, assignment)) ++count;
  }
  return count;
}

GadgetModel::GadgetModel(CnfFormula formula)
    : formula_(std::move(formula)),
      vocab_({"0", "1", "b0", "b1", "eos"}, kEos) {}

std::vector<Rat> GadgetModel::conditional_row(std::span<const TokenId> prefix) const {
  const int m = formula_.num_vars();
  const int i = static_cast<int>(prefix.size());
  std::vector<Rat> row(5, Rat(0));
  if (i < m) {
    row[kBit0] = Rat(1, 2);
    row[kBit1] = Rat(1, 2);
    return row;
  }
  if (i == m) {
    bool sat = true;
    std::vector<std::uint8_t> assignment(m);
    for (int k = 0; k < m; ++k) {
      if (prefix[k] != kBit0 && prefix[k] != kBit1) {
        sat = false;  // zero-probability prefix; fix a total row anyway
        break;
      }
      assignment[k] = prefix[k] == kBit1;
    }
    if (sat) sat = satisfies(formula_, assignment);
    if (sat) {
      row[kEos] = 1;
    } else {
      row[kBranch0] = Rat(1, 2);
      row[kBranch1] = Rat(1, 2);
    }
    return row;
  }
  row[kEos] = 1;
  return row;
}

GadgetModel build_gadget(CnfFormula formula) { return GadgetModel(std::move(formula)); }

}  // namespace argen
