// Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
// criterion fails. Expects the data directory layout shipped in-repo and,
// for the determinism criterion, the path to the CLI binary via --cli.

#include "argen/biaslab.hpp"
#include "argen/decoders.hpp"
#include "argen/dynprog.hpp"
#include "argen/gadget.hpp"
#include "argen/markov.hpp"
#include "argen/oracle.hpp"
#include "support/random_instances.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace argen;

namespace {

std::string g_data_dir = ARGEN_DATA_DIR;
std::string g_cli_path;
int g_failures = 0;

struct Criterion {
  int number;
  std::string title;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }

  ~Criterion() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (problems.empty()) {
      std::printf("PASS  criterion %d: %s  (%.2fs)\n", number, title.c_str(), seconds);
    } else {
      ++g_failures;
      std::printf("FAIL  criterion %d: %s  (%.2fs)\n", number, title.c_str(), seconds);
      for (const auto& problem : problems) std::printf("      - %s\n", problem.c_str());
    }
    std::fflush(stdout);
  }
};

struct CorpusEntry {
  std::string name;
  CnfFormula formula;
  std::uint64_t model_count;
};

std::vector<CorpusEntry> load_corpus(Criterion& c) {
  std::vector<CorpusEntry> corpus;
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(g_data_dir + "/cnf")) {
    if (entry.path().extension() == ".cnf") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    CnfFormula formula = load_dimacs_file(path);
    const std::uint64_t count = count_models_bruteforce(formula);
    corpus.push_back({std::filesystem::path(path).filename().string(), std::move(formula), count});
  }
  c.require(corpus.size() >= 30, "corpus must ship at least 30 DIMACS instances, found " +
                                     std::to_string(corpus.size()));
  int sat = 0, unsat = 0;
  for (const auto& entry : corpus) {
    c.require(entry.formula.num_vars() <= 12,
              entry.name + ": more than 12 variables in the desk-scale corpus");
    (entry.model_count > 0 ? sat : unsat)++;
  }
  c.require(sat >= 5 && unsat >= 5, "corpus must mix satisfiable and unsatisfiable instances");
  for (const char* required : {"unit1.cnf", "contradiction1.cnf", "or2.cnf", "xor2.cnf"}) {
    bool found = false;
    for (const auto& entry : corpus) found |= entry.name == required;
    c.require(found, std::string("missing structural instance ") + required);
  }
  return corpus;
}

ConstraintAutomaton reduction_unary(const CnfFormula& formula, const Vocabulary& vocab) {
  UnaryConstraint unary;
  for (int i = 0; i < formula.num_vars(); ++i) unary.allowed_sets.push_back({0, 1});
  unary.allowed_sets.push_back({vocab.eos()});
  return compile(unary, vocab);
}

struct Fixture {
  std::string model_file;
  std::string constraint_file;
  MarkovModel model;
  ConstraintAutomaton constraint;
};

std::vector<Fixture> load_fixtures() {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"uniform_ab.mm", "fixedlen3.ct"},          {"uniform_ab.mm", "metrical_k2.ct"},
      {"m1.mm", "inpaint_a_eos_l4.ct"},           {"m1.mm", "unary_u1.ct"},
      {"skew_ab.mm", "metrical_deadend_k4.ct"},   {"beam3.mm", "fixedlen3.ct"},
  };
  std::vector<Fixture> fixtures;
  for (const auto& [model_file, constraint_file] : pairs) {
    MarkovModel model = MarkovModel::load_file(g_data_dir + "/models/" + model_file);
    ConstraintAutomaton constraint =
        load_constraint_file(g_data_dir + "/constraints/" + constraint_file, model.vocab());
    fixtures.push_back(
        {model_file, constraint_file, std::move(model), std::move(constraint)});
  }
  return fixtures;
}

Rat tv_against(const std::vector<std::pair<CompleteSequence, Rat>>& exact_law,
               const std::map<CompleteSequence, long long, CanonicalLess>& counts,
               long long total) {
  Rat l1 = 0;
  for (const auto& [sequence, probability] : exact_law) {
    const auto it = counts.find(sequence);
    const Rat empirical(it == counts.end() ? 0 : it->second, total);
    const Rat diff = empirical - probability;
    l1 += diff < 0 ? -diff : diff;
  }
  return l1 / 2;
}

std::string run_command(const std::string& command, int& exit_code) {
  std::string output;
  FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
  if (!pipe) {
    exit_code = -1;
    return output;
  }
  char buffer[4096];
  std::size_t n;
  while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, n);
  const int status = pclose(pipe);
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return output;
}

// --------------------------------------------------------------------------

void criterion_1_and_2(const std::vector<CorpusEntry>& corpus) {
  {
    Criterion c{1, "exact MAP ends at position m+1 iff the formula is satisfiable"};
    for (const auto& entry : corpus) {
      const GadgetModel model = build_gadget(entry.formula);
      const int m = entry.formula.num_vars();
      const auto best = oracle::exact_map(model, m + 2);
      if (!best) {
        c.require(false, entry.name + ": MAP unexpectedly infeasible");
        continue;
      }
      const bool ends_at_m1 = best->first.tokens()[m] == GadgetModel::kEos;
      c.require(ends_at_m1 == (entry.model_count > 0), entry.name + ": MAP identity violated");
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c.started).count();
    c.require(elapsed < 5.0, "criterion 1 exceeded the 5 s budget");
  }
  {
    Criterion c{2, "Z_{m+1} * 2^m equals the truth-table model count"};
    for (const auto& entry : corpus) {
      const GadgetModel model = build_gadget(entry.formula);
      const int m = entry.formula.num_vars();
      const auto fixed = compile(FixedLengthConstraint{m + 1}, model.vocab());
      const auto conditional = oracle::exact_conditional(model, fixed);
      const Rat z = conditional ? conditional->normalizer : Rat(0);
      c.require(z * pow2(m) == Rat(entry.model_count), entry.name + ": counting identity violated");
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c.started).count();
    c.require(elapsed < 5.0, "criterion 2 exceeded the 5 s budget");
  }
}

void criterion_3(const std::vector<CorpusEntry>& corpus) {
  Criterion c{3, "the unary reduction is infeasible iff unsatisfiable, else optimum 2^-m"};
  for (const auto& entry : corpus) {
    const GadgetModel model = build_gadget(entry.formula);
    const int m = entry.formula.num_vars();
    const auto automaton = reduction_unary(entry.formula, model.vocab());
    const auto best = oracle::exact_map(model, m + 2, &automaton);
    if (entry.model_count == 0) {
      c.require(!best.has_value(), entry.name + ": expected the infeasible signal");
    } else {
      c.require(best.has_value() && best->second == pow2(-m),
                entry.name + ": constrained optimum is not 2^-m");
    }
  }
}

void criterion_4(const std::vector<CorpusEntry>& corpus) {
  Criterion c{4, "MAP-THRESHOLD at (m+1, 2^-m) decides satisfiability, witnesses certified"};
  for (const auto& entry : corpus) {
    const GadgetModel model = build_gadget(entry.formula);
    const int m = entry.formula.num_vars();
    const bool answer = oracle::map_threshold(model, m + 1, pow2(-m), m + 2);
    c.require(answer == (entry.model_count > 0), entry.name + ": threshold disagrees");
    const auto witness = oracle::best_of_length(model, m + 1);
    if (entry.model_count > 0) {
      c.require(witness.has_value() &&
                    oracle::certificate_check(model, witness->first, pow2(-m)),
                entry.name + ": witness fails the certificate check");
    } else {
      c.require(!witness.has_value() ||
                    !oracle::certificate_check(model, witness->first, pow2(-m)),
                entry.name + ": unsatisfiable instance produced a certified witness");
    }
  }
}

void criterion_5() {
  Criterion c{5, "dynprog Z / Viterbi / conditionals equal the oracle on 100 random instances"};
  SplitMix64 rng(987654321);
  int checked = 0;
  for (int family = 0; family < 4; ++family) {
    for (int i = 0; i < 25; ++i) {
      const auto instance = testsupport::make_random_instance(rng, false, family);
      const auto horizon =
          instance.constraint->implied_horizon(instance.model->vocab().eos());
      if (!horizon) {
        c.require(false, instance.description + ": no implied horizon");
        continue;
      }
      const dynprog::ContinuationTable table(*instance.model, *instance.constraint);
      const auto conditional =
          oracle::exact_conditional(*instance.model, *instance.constraint, *horizon);
      const auto viterbi = dynprog::viterbi_map(*instance.model, *instance.constraint);
      const auto oracle_map =
          oracle::exact_map(*instance.model, *horizon, instance.constraint.get());
      if (!conditional) {
        c.require(table.z() == 0, instance.description + ": dynprog Z nonzero, oracle infeasible");
        c.require(!viterbi && !oracle_map, instance.description + ": MAP disagreement at Z = 0");
        ++checked;
        continue;
      }
      c.require(table.z() == conditional->normalizer, instance.description + ": Z mismatch");
      c.require(conditional->support.size() <= 200,
                instance.description + ": feasible set exceeds the desk-scale bound");
      c.require(viterbi.has_value() && oracle_map.has_value(),
                instance.description + ": MAP feasibility disagreement");
      if (viterbi && oracle_map) {
        c.require(viterbi->first == oracle_map->first && viterbi->second == oracle_map->second,
                  instance.description + ": MAP mismatch");
      }
      const auto support = dynprog::enumerate_feasible(table);
      bool same = support.size() == conditional->support.size();
      for (std::size_t k = 0; same && k < support.size(); ++k) {
        same = support[k].first == conditional->support[k].first &&
               support[k].second == conditional->support[k].second;
      }
      c.require(same, instance.description + ": conditional law mismatch");
      ++checked;
    }
  }
  c.require(checked >= 100, "fewer than 100 instances were compared");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - c.started).count();
  c.require(elapsed < 60.0, "criterion 5 exceeded the 60 s budget");
}

void criterion_6(const std::vector<Fixture>& fixtures) {
  Criterion c{6, "exact and rejection samplers reach TV < 0.02 at 1e5 draws on every fixture"};
  const long long trials = 100000;
  const Rat bound(1, 50);
  for (const auto& fixture : fixtures) {
    const std::string id = fixture.model_file + " x " + fixture.constraint_file;
    const dynprog::ContinuationTable table(fixture.model, fixture.constraint);
    const auto exact_law = dynprog::enumerate_feasible(table);

    std::map<CompleteSequence, long long, CanonicalLess> counts;
    const SplitMix64 master(606060);
    for (long long i = 0; i < trials; ++i) {
      SplitMix64 draw_rng = master.derive(i);
      ++counts[dynprog::exact_constrained_sample(table, draw_rng)];
    }
    c.require(tv_against(exact_law, counts, trials) < bound, id + ": exact sampler TV >= 0.02");

    std::map<CompleteSequence, long long, CanonicalLess> accepted;
    const SplitMix64 rejection_master(707070);
    long long accepted_count = 0;
    std::uint64_t attempt = 0;
    const std::uint64_t attempt_cap = 60'000'000;
    while (accepted_count < trials && attempt < attempt_cap) {
      SplitMix64 draw_rng = rejection_master.derive(attempt++);
      const auto draw = ancestral_sample(fixture.model, draw_rng, 64);
      if (draw.sequence && accepts(fixture.constraint, *draw.sequence)) {
        ++accepted[*draw.sequence];
        ++accepted_count;
      }
    }
    c.require(accepted_count == trials, id + ": rejection sampling hit the attempt cap");
    c.require(tv_against(exact_law, accepted, trials) < bound,
              id + ": rejection sampler TV >= 0.02");
  }
}

void criterion_7(const std::vector<Fixture>& fixtures) {
  Criterion c{7, "bias witnesses: masked TV = 1/4 +- 0.02, greedy misses Viterbi and coverage"};
  const auto& uniform = fixtures[1].model;       // uniform_ab x metrical_k2
  const auto& metrical = fixtures[1].constraint;

  // The derived reference values, certified through the oracle first.
  const auto conditional = oracle::exact_conditional(uniform, metrical);
  c.require(conditional.has_value() && conditional->normalizer == Rat(4, 27),
            "oracle Z of the metrical fixture is not 4/27");
  if (conditional) {
    c.require(conditional->support.size() == 2 &&
                  conditional->support[0].second == Rat(3, 4) &&
                  conditional->support[1].second == Rat(1, 4),
              "oracle conditional of the metrical fixture is not {3/4, 1/4}");
  }

  biaslab::Instance instance{&uniform, &metrical, "uniform_ab", "metrical_k2", std::nullopt};
  decoders::Config masked;
  masked.kind = decoders::Kind::masked_ancestral;
  const auto report = biaslab::run_experiment(instance, masked, 100000, 4242);
  const Rat gap = report.tv_distance - Rat(1, 4);
  c.require((gap < 0 ? -gap : gap) <= Rat(1, 50),
            "masked TV " + fraction_string(report.tv_distance) + " is not within 0.02 of 1/4");

  const auto greedy = decoders::greedy_decode(uniform, metrical, 16);
  const auto viterbi = dynprog::viterbi_map(uniform, metrical);
  c.require(greedy.ok() && greedy.sequence->tokens() == std::vector<TokenId>{0, 0, 2},
            "greedy does not return [a, a, eos] on the metrical fixture");
  c.require(viterbi.has_value() && viterbi->first.tokens() == std::vector<TokenId>{1, 2} &&
                viterbi->second == Rat(1, 9),
            "Viterbi does not return [b, eos] with probability 1/9");
  if (greedy.ok() && viterbi) {
    c.require(sequence_probability(uniform, *greedy.sequence) == Rat(1, 27) &&
                  Rat(1, 27) < viterbi->second,
              "greedy output is not strictly dominated (1/27 < 1/9)");
  }

  // Coverage witness: greedy reaches exactly one of >= 4 feasible sequences.
  const auto& cover_model = fixtures[0].model;       // uniform_ab x fixedlen3
  const auto& cover_constraint = fixtures[0].constraint;
  biaslab::Instance cover{&cover_model, &cover_constraint, "uniform_ab", "fixedlen3",
                          std::nullopt};
  decoders::Config greedy_config;
  greedy_config.kind = decoders::Kind::greedy;
  const auto cover_report = biaslab::run_experiment(cover, greedy_config, 1000, 99);
  c.require(cover_report.exact_support_size >= 4,
            "coverage fixture has fewer than 4 feasible sequences");
  c.require(cover_report.coverage <= Rat(1, 4),
            "greedy coverage " + fraction_string(cover_report.coverage) + " exceeds 1/4");
}

void criterion_8() {
  Criterion c{8, "identical inputs and seeds produce byte-identical reports"};
  if (g_cli_path.empty()) {
    c.require(false, "pass --cli <path-to-binary> to run the determinism criterion");
    return;
  }
  const std::vector<std::string> commands = {
      g_cli_path + " bias --model " + g_data_dir + "/models/uniform_ab.mm --constraint " +
          g_data_dir + "/constraints/metrical_k2.ct --decoder masked --trials 2000 --seed 7",
      g_cli_path + " sample --model " + g_data_dir + "/models/m1.mm --constraint " +
          g_data_dir + "/constraints/inpaint_a_eos_l4.ct --engine exact --n 50 --seed 3",
      g_cli_path + " gadget-verify " + g_data_dir + "/cnf/or2.cnf",
      g_cli_path + " z --model " + g_data_dir + "/models/uniform_ab.mm --constraint " +
          g_data_dir + "/constraints/fixedlen3.ct --engine dynprog --check-oracle",
  };
  for (const auto& command : commands) {
    int code_a = 0, code_b = 0;
    const std::string first = run_command(command, code_a);
    const std::string second = run_command(command, code_b);
    c.require(code_a == 0 && code_b == 0, "nonzero exit: " + command);
    c.require(!first.empty(), "empty report: " + command);
    c.require(first == second, "outputs differ across runs: " + command);
  }
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--data") g_data_dir = argv[i + 1];
    else if (flag == "--cli") g_cli_path = argv[i + 1];
  }

  std::vector<CorpusEntry> corpus;
  {
    Criterion c{0, "corpus and fixtures load"};
    try {
      corpus = load_corpus(c);
    } catch (const std::exception& e) {
      c.require(false, e.what());
    }
  }
  std::vector<Fixture> fixtures;
  try {
    fixtures = load_fixtures();
  } catch (const std::exception& e) {
    std::printf("FAIL  fixtures: %s\n", e.what());
    return 1;
  }

  criterion_1_and_2(corpus);
  criterion_3(corpus);
  criterion_4(corpus);
  criterion_5();
  criterion_6(fixtures);
  criterion_7(fixtures);
  criterion_8();

  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
