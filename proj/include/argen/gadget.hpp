#pragma once

#include "argen/armodel.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace argen {

// CNF over variables 1..num_vars; a literal is +v or -v. Clauses are
// nonempty. num_vars may be 0, in which case the formula is clause-free and
// the empty assignment satisfies it vacuously.
class CnfFormula {
 public:
  CnfFormula(int num_vars, std::vector<std::vector<int>> clauses);

  int num_vars() const { return num_vars_; }
  const std::vector<std::vector<int>>& clauses() const { return clauses_; }

 private:
  int num_vars_;
  std::vector<std::vector<int>> clauses_;
};

// DIMACS "p cnf" reader. Comment lines start with 'c'; clauses are
// 0-terminated and may span lines. The clause count must match the header.
// Errors carry 1-based line numbers.
CnfFormula parse_dimacs(std::istream& in);
CnfFormula parse_dimacs_text(std::string_view text);
CnfFormula load_dimacs_file(const std::string& path);

// True iff every clause has a satisfied literal; assignment[i] is the value
// of variable i+1 and must have exactly num_vars entries.
bool satisfies(const CnfFormula& f, std::span<const std::uint8_t> assignment);

// Exhaustive truth-table model count. Intentionally exponential (this is
// the desk-scale counting oracle); refuses when num_vars > max_vars.
std::uint64_t count_models_bruteforce(const CnfFormula& f, int max_vars = 24);

// Autoregressive model built from a CNF formula over the fixed alphabet
// {0, 1, b0, b1, eos}: the first num_vars steps emit bits uniformly, then a
// prefix that satisfies the formula ends immediately while any other prefix
// emits one uniformly-chosen branch token before ending. The step-(m+1) row
// evaluates clause satisfaction from the prefix on demand; nothing is
// precomputed from the 2^m assignment space.
class GadgetModel final : public ArModel {
 public:
  enum Token : TokenId { kBit0 = 0, kBit1 = 1, kBranch0 = 2, kBranch1 = 3, kEos = 4 };

  explicit GadgetModel(CnfFormula formula);

  const Vocabulary& vocab() const override { return vocab_; }
  const CnfFormula& formula() const { return formula_; }

 protected:
  std::vector<Rat> conditional_row(std::span<const TokenId> prefix) const override;

 private:
  CnfFormula formula_;
  Vocabulary vocab_;
};

GadgetModel build_gadget(CnfFormula formula);

}  // namespace argen
