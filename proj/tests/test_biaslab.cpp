#include "argen/biaslab.hpp"

#include "argen/report.hpp"
#include "support/test_support.hpp"

#include <doctest.h>

using namespace argen;
using namespace testsupport;

namespace {

biaslab::Instance make_instance(const ArModel& model, const ConstraintAutomaton& constraint,
                                std::string model_id, std::string constraint_id) {
  return biaslab::Instance{&model, &constraint, std::move(model_id), std::move(constraint_id),
                           std::nullopt};
}

decoders::Config config_of(decoders::Kind kind) {
  decoders::Config config;
  config.kind = kind;
  return config;
}

}  // namespace

TEST_CASE("masked ancestral bias on the metrical fixture approaches TV = 1/4") {
  const auto uniform = uniform_ab();
  const auto automaton = metrical_k2(uniform.vocab());
  const auto report =
      biaslab::run_experiment(make_instance(uniform, automaton, "uniform", "metrical-k2"),
                              config_of(decoders::Kind::masked_ancestral), 20000, 11);
  CHECK(report.exact_support_size == 2);
  CHECK(report.samples_feasible == 20000);  // this fixture never dead-ends
  CHECK(report.dead_ends == 0);
  CHECK(report.coverage == Rat(1));
  const Rat gap = report.tv_distance - Rat(1, 4);
  CHECK((gap < 0 ? -gap : gap) < Rat(1, 40));
  CHECK(report.kl_defined);
  CHECK(report.kl_empirical_to_exact > 0.0);
}

TEST_CASE("the exact sampler passes the null bias test") {
  const auto uniform = uniform_ab();
  const auto automaton = compile(FixedLengthConstraint{3}, uniform.vocab());
  const auto report =
      biaslab::run_experiment(make_instance(uniform, automaton, "uniform", "fixedlen-3"),
                              config_of(decoders::Kind::exact), 20000, 5);
  CHECK(report.exact_support_size == 4);
  CHECK(report.coverage == Rat(1));
  CHECK(report.tv_distance < Rat(1, 25));
  CHECK(report.samples_feasible == 20000);
}

TEST_CASE("rejection sampling is unbiased conditional on acceptance") {
  const auto uniform = uniform_ab();
  const auto automaton = metrical_k2(uniform.vocab());
  auto config = config_of(decoders::Kind::rejection);
  config.max_attempts = 200;
  const auto report = biaslab::run_experiment(
      make_instance(uniform, automaton, "uniform", "metrical-k2"), config, 20000, 23);
  CHECK(report.samples_feasible == 20000);  // exhaustion odds are negligible at 200 attempts
  CHECK(report.tv_distance < Rat(1, 25));
  CHECK(report.coverage == Rat(1));
  // Z = 4/27, so roughly 20000 * 23/4 rejected draws arrive along the way
  CHECK(report.rejections > 90000);
  CHECK(report.rejections < 140000);
}

TEST_CASE("greedy coverage collapses to a single output") {
  const auto uniform = uniform_ab();
  const auto automaton = compile(FixedLengthConstraint{3}, uniform.vocab());
  const auto report =
      biaslab::run_experiment(make_instance(uniform, automaton, "uniform", "fixedlen-3"),
                              config_of(decoders::Kind::greedy), 200, 1);
  CHECK(report.exact_support_size == 4);
  CHECK(report.coverage == Rat(1, 4));
  CHECK(report.samples_feasible == 200);
  CHECK_FALSE(report.kl_defined);  // coverage < 1 flags KL undefined
  long long observed = 0;
  for (const auto& row : report.table) {
    if (row.count > 0) {
      ++observed;
      CHECK(row.sequence.tokens() == std::vector<TokenId>{0, 0, 2});
    }
  }
  CHECK(observed == 1);
}

TEST_CASE("dead ends are counted apart from the empirical law") {
  const auto skew = iid_ab(Rat(1, 4), Rat(5, 12), Rat(1, 3));
  const auto automaton = compile(MetricalConstraint{{2, 3, 0}, 4}, skew.vocab());
  const auto report =
      biaslab::run_experiment(make_instance(skew, automaton, "skew", "metrical-deadend"),
                              config_of(decoders::Kind::masked_ancestral), 4000, 3);
  CHECK(report.exact_support_size == 1);
  CHECK(report.dead_ends > 2000);  // the b branch (masked weight 5/8) strands the budget
  CHECK(report.dead_ends < 3000);
  CHECK(report.samples_feasible + report.dead_ends == 4000);
  CHECK(report.coverage == Rat(1));
  CHECK(report.tv_distance == Rat(0));  // the single surviving output matches exactly
}

TEST_CASE("experiments are deterministic in the seed") {
  const auto uniform = uniform_ab();
  const auto automaton = metrical_k2(uniform.vocab());
  const auto instance = make_instance(uniform, automaton, "uniform", "metrical-k2");
  const auto a =
      biaslab::run_experiment(instance, config_of(decoders::Kind::masked_ancestral), 3000, 77);
  const auto b =
      biaslab::run_experiment(instance, config_of(decoders::Kind::masked_ancestral), 3000, 77);
  CHECK(report::bias_report_json(a, uniform.vocab()) ==
        report::bias_report_json(b, uniform.vocab()));
  const auto c =
      biaslab::run_experiment(instance, config_of(decoders::Kind::masked_ancestral), 3000, 78);
  CHECK(report::bias_report_json(a, uniform.vocab()) !=
        report::bias_report_json(c, uniform.vocab()));
}

TEST_CASE("infeasible instances are refused with a diagnosis") {
  const auto uniform = uniform_ab();
  UnaryConstraint unary;
  unary.allowed_sets = {{0}, {0}};
  const auto automaton = compile(unary, uniform.vocab());
  CHECK_THROWS_AS(
      biaslab::run_experiment(make_instance(uniform, automaton, "uniform", "dead"),
                              config_of(decoders::Kind::masked_ancestral), 10, 1),
      std::invalid_argument);
}

TEST_CASE("sweep collects per-pair refusals without aborting") {
  const auto uniform = uniform_ab();
  const auto metrical = metrical_k2(uniform.vocab());
  const auto fixed = compile(FixedLengthConstraint{3}, uniform.vocab());
  UnaryConstraint dead_unary;
  dead_unary.allowed_sets = {{0}, {0}};
  const auto dead = compile(dead_unary, uniform.vocab());

  const std::vector<biaslab::Instance> instances = {
      make_instance(uniform, metrical, "uniform", "metrical-k2"),
      make_instance(uniform, fixed, "uniform", "fixedlen-3"),
      make_instance(uniform, dead, "uniform", "dead"),
  };
  const std::vector<decoders::Config> configs = {config_of(decoders::Kind::masked_ancestral),
                                                 config_of(decoders::Kind::exact)};
  const auto result = biaslab::sweep(instances, configs, 500, 9);
  CHECK(result.reports.size() == 4);
  CHECK(result.failures.size() == 2);  // both decoders refuse the dead instance
  CHECK(result.failures[0].find("dead") != std::string::npos);

  // identical inputs reproduce byte-identical report sets
  const auto again = biaslab::sweep(instances, configs, 500, 9);
  REQUIRE(again.reports.size() == result.reports.size());
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    CHECK(report::bias_report_json(result.reports[i], uniform.vocab()) ==
          report::bias_report_json(again.reports[i], uniform.vocab()));
  }
}

TEST_CASE("empirical frequencies sum to 1 over feasible outputs") {
  const auto uniform = uniform_ab();
  const auto automaton = compile(FixedLengthConstraint{2}, uniform.vocab());
  const auto report =
      biaslab::run_experiment(make_instance(uniform, automaton, "uniform", "fixedlen-2"),
                              config_of(decoders::Kind::exact), 500, 2);
  Rat total = 0;
  for (const auto& row : report.table) total += row.empirical_frequency;
  CHECK(total == Rat(1));
}
