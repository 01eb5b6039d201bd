#include "argen/oracle.hpp"

#include "argen/gadget.hpp"
#include "support/random_instances.hpp"
#include "support/test_support.hpp"

#include <doctest.h>

using namespace argen;
using namespace testsupport;

TEST_CASE("enumerate_support lists the short complete sequences with exact residual") {
  const auto uniform = uniform_ab();
  const auto support = oracle::enumerate_support(uniform, 2);
  REQUIRE(support.entries.size() == 3);
  CHECK(support.entries[0].first.tokens() == std::vector<TokenId>{2});
  CHECK(support.entries[0].second == Rat(1, 3));
  CHECK(support.entries[1].first.tokens() == std::vector<TokenId>{0, 2});
  CHECK(support.entries[1].second == Rat(1, 9));
  CHECK(support.entries[2].first.tokens() == std::vector<TokenId>{1, 2});
  CHECK(support.entries[2].second == Rat(1, 9));
  CHECK(support.residual_mass == Rat(4, 9));

  const auto at_one = oracle::enumerate_support(uniform, 1);
  REQUIRE(at_one.entries.size() == 1);
  CHECK(at_one.entries[0].second == Rat(1, 3));
  CHECK(at_one.residual_mass == Rat(2, 3));
}

TEST_CASE("enumerate_support output is canonically ordered") {
  const auto model = m1();
  const auto support = oracle::enumerate_support(model, 4);
  for (std::size_t i = 1; i < support.entries.size(); ++i) {
    CHECK(canonical_less(support.entries[i - 1].first, support.entries[i].first));
  }
}

TEST_CASE("the enumeration budget refuses oversized requests with an estimate") {
  const auto uniform = uniform_ab();
  oracle::Limits limits;
  limits.max_visited_prefixes = 10;
  try {
    oracle::enumerate_support(uniform, 12, limits);
    FAIL("expected a budget refusal");
  } catch (const oracle::BudgetExceededError& e) {
    CHECK(e.visited > 10);
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}

TEST_CASE("exact_map finds the satisfying prefix of the or-gadget") {
  const auto gadget = build_gadget(parse_dimacs_text("p cnf 2 1\n1 2 0"));
  const auto best = oracle::exact_map(gadget, 4);
  REQUIRE(best.has_value());
  // maximizers are the three satisfying bit prefixes; canonical order picks 01
  CHECK(best->first.tokens() == std::vector<TokenId>{0, 1, 4});
  CHECK(best->second == Rat(1, 4));
}

TEST_CASE("exact_map breaks full ties canonically") {
  const auto contradiction = build_gadget(parse_dimacs_text("p cnf 1 2\n1 0\n-1 0"));
  const auto best = oracle::exact_map(contradiction, 3);
  REQUIRE(best.has_value());
  CHECK(best->first.tokens() == std::vector<TokenId>{0, 2, 4});  // [0, b0, eos]
  CHECK(best->second == Rat(1, 4));
}

TEST_CASE("constrained exact_map signals infeasibility on the unsat reduction") {
  const auto contradiction = build_gadget(parse_dimacs_text("p cnf 1 2\n1 0\n-1 0"));
  UnaryConstraint unary;
  unary.allowed_sets = {{0, 1}, {4}};
  const auto automaton = compile(unary, contradiction.vocab());
  CHECK_FALSE(oracle::exact_map(contradiction, 3, &automaton).has_value());

  const auto sat = build_gadget(parse_dimacs_text("p cnf 1 1\n1 0"));
  const auto automaton_sat = compile(unary, sat.vocab());
  const auto best = oracle::exact_map(sat, 3, &automaton_sat);
  REQUIRE(best.has_value());
  CHECK(best->second == Rat(1, 2));
}

TEST_CASE("map_threshold instantiates the reduction thresholds") {
  const auto or2 = build_gadget(parse_dimacs_text("p cnf 2 1\n1 2 0"));
  CHECK(oracle::map_threshold(or2, 3, Rat(1, 4), 4));
  const auto contradiction = build_gadget(parse_dimacs_text("p cnf 1 2\n1 0\n-1 0"));
  CHECK_FALSE(oracle::map_threshold(contradiction, 2, Rat(1, 2), 3));
  CHECK(oracle::map_threshold(contradiction, 2, Rat(0), 3));
  CHECK_THROWS_AS(oracle::map_threshold(or2, 3, Rat(1, 4), 2), std::invalid_argument);
}

TEST_CASE("certificate_check multiplies the local conditionals") {
  const auto or2 = build_gadget(parse_dimacs_text("p cnf 2 1\n1 2 0"));
  const auto& vocab = or2.vocab();
  CHECK(oracle::certificate_check(or2, CompleteSequence::checked({1, 0, 4}, vocab), Rat(1, 4)));
  CHECK_FALSE(
      oracle::certificate_check(or2, CompleteSequence::checked({0, 0, 2, 4}, vocab), Rat(1, 4)));
  CHECK(oracle::certificate_check(or2, CompleteSequence::checked({0, 0, 2, 4}, vocab), Rat(0)));
}

TEST_CASE("exact_conditional recovers the counting identity on the or-gadget") {
  const auto or2 = build_gadget(parse_dimacs_text("p cnf 2 1\n1 2 0"));
  const auto fixed = compile(FixedLengthConstraint{3}, or2.vocab());
  const auto conditional = oracle::exact_conditional(or2, fixed);
  REQUIRE(conditional.has_value());
  CHECK(conditional->normalizer == Rat(3, 4));
  CHECK(conditional->support.size() == 3);
}

TEST_CASE("exact_conditional of the uniform model at fixed length is uniform") {
  const auto uniform = uniform_ab();
  const auto fixed = compile(FixedLengthConstraint{3}, uniform.vocab());
  const auto conditional = oracle::exact_conditional(uniform, fixed);
  REQUIRE(conditional.has_value());
  CHECK(conditional->normalizer == Rat(4, 27));
  REQUIRE(conditional->support.size() == 4);
  for (const auto& [sequence, probability] : conditional->support) {
    CHECK(probability == Rat(1, 4));
  }
}

TEST_CASE("exact_conditional on the metrical fixture") {
  const auto uniform = uniform_ab();
  const auto automaton = metrical_k2(uniform.vocab());
  const auto conditional = oracle::exact_conditional(uniform, automaton);
  REQUIRE(conditional.has_value());
  CHECK(conditional->normalizer == Rat(4, 27));
  REQUIRE(conditional->support.size() == 2);
  CHECK(conditional->support[0].first.tokens() == std::vector<TokenId>{1, 2});  // [b, eos]
  CHECK(conditional->support[0].second == Rat(3, 4));
  CHECK(conditional->support[1].first.tokens() == std::vector<TokenId>{0, 0, 2});
  CHECK(conditional->support[1].second == Rat(1, 4));
}

TEST_CASE("conditional entries times Z recover the unconditional probabilities") {
  const auto model = m1();
  const auto automaton = compile(InpaintingSpec{{0}, {2}, 4}, model.vocab());
  const auto conditional = oracle::exact_conditional(model, automaton);
  REQUIRE(conditional.has_value());
  for (const auto& [sequence, probability] : conditional->support) {
    CHECK(probability * conditional->normalizer == sequence_probability(model, sequence));
  }
}

TEST_CASE("exact_conditional reports infeasibility as an empty result") {
  const auto contradiction = build_gadget(parse_dimacs_text("p cnf 1 2\n1 0\n-1 0"));
  UnaryConstraint unary;
  unary.allowed_sets = {{0, 1}, {4}};
  const auto automaton = compile(unary, contradiction.vocab());
  CHECK_FALSE(oracle::exact_conditional(contradiction, automaton).has_value());
}

TEST_CASE("unbounded constraints need an explicit horizon") {
  const auto uniform = uniform_ab();
  const auto automaton = accept_all(uniform.vocab());
  CHECK_THROWS_AS(oracle::exact_conditional(uniform, automaton), std::invalid_argument);
  const auto conditional = oracle::exact_conditional(uniform, automaton, 2);
  REQUIRE(conditional.has_value());
  CHECK(conditional->normalizer == Rat(1, 3) + Rat(2, 9));
}

TEST_CASE("mass plus residual is exactly 1 on random instances") {
  SplitMix64 rng(2026);
  for (int i = 0; i < 10; ++i) {
    const auto instance = make_random_instance(rng);
    for (int horizon = 1; horizon <= 4; ++horizon) {
      const auto support = oracle::enumerate_support(*instance.model, horizon);
      Rat total = support.residual_mass;
      for (const auto& [sequence, probability] : support.entries) total += probability;
      CHECK(total == Rat(1));
    }
  }
}
