#include "cli.hpp"

#include "argen/biaslab.hpp"
#include "argen/decoders.hpp"
#include "argen/dynprog.hpp"
#include "argen/gadget.hpp"
#include "argen/markov.hpp"
#include "argen/oracle.hpp"
#include "argen/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace argen::cli {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kBudget = 2;
constexpr int kIdentity = 3;

using report::Document;
using report::Json;
using report::rational_field;

struct Common {
  std::string model_path;
  std::string gadget_path;
  std::string constraint_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  long long budget = 10'000'000;
  bool check_oracle = false;
};

void add_output_flags(CLI::App* cmd, Common& common) {
  cmd->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", common.out_path, "Write the report to a file instead of stdout");
  if (!cmd->get_option_no_throw("--seed"))
    cmd->add_option("--seed", common.seed, "Master seed (ignored by deterministic commands)");
}

void add_model_flags(CLI::App* cmd, Common& common) {
  auto* model = cmd->add_option("--model", common.model_path, "Markov model file");
  auto* gadget = cmd->add_option("--gadget", common.gadget_path, "DIMACS CNF file");
  model->excludes(gadget);
  gadget->excludes(model);
}

struct LoadedModel {
  std::unique_ptr<ArModel> model;
  std::string id;
  bool is_markov = false;
};

LoadedModel load_model(const Common& common) {
  if (!common.model_path.empty()) {
    return {std::make_unique<MarkovModel>(MarkovModel::load_file(common.model_path)),
            common.model_path, true};
  }
  if (!common.gadget_path.empty()) {
    return {std::make_unique<GadgetModel>(build_gadget(load_dimacs_file(common.gadget_path))),
            common.gadget_path, false};
  }
  throw std::invalid_argument("one of --model or --gadget is required");
}

std::optional<ConstraintAutomaton> load_constraint(const Common& common,
                                                   const Vocabulary& vocab) {
  if (common.constraint_path.empty()) return std::nullopt;
  return load_constraint_file(common.constraint_path, vocab);
}

oracle::Limits limits_of(const Common& common) { return oracle::Limits{common.budget}; }

void emit(const Common& common, const std::string& text) {
  if (common.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(common.out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + common.out_path);
  out << text;
}

Json sequence_result(const Vocabulary& vocab,
                     const std::optional<std::pair<CompleteSequence, Rat>>& best) {
  Json j;
  j["feasible"] = best.has_value();
  if (best) {
    j["sequence"] = vocab.render(best->first.tokens());
    j["probability"] = rational_field(best->second);
  }
  return j;
}

int oracle_mismatch(const Common& common, const std::string& what) {
  std::cerr << "check-oracle mismatch: " << what << "\n";
  (void)common;
  return kIdentity;
}

// ---------------------------------------------------------------------------
// gadget-verify
// ---------------------------------------------------------------------------

int cmd_gadget_verify(const Common& common, const std::string& dimacs_path, int max_vars) {
  const CnfFormula formula = load_dimacs_file(dimacs_path);
  const int m = formula.num_vars();
  if (m > max_vars) {
    std::cerr << "budget refused: " << m << " variables exceeds --max-vars " << max_vars
              << " (truth-table counting is 2^m work)\n";
    return kBudget;
  }
  const std::uint64_t count = count_models_bruteforce(formula, max_vars);
  const bool satisfiable = count > 0;
  const GadgetModel model = build_gadget(formula);

  const auto map = oracle::exact_map(model, m + 2, nullptr, limits_of(common));
  if (!map) throw std::logic_error("gadget model lost all probability mass");
  const bool map_ends_at_m1 = map->first.tokens()[m] == GadgetModel::kEos;
  const bool map_identity = map_ends_at_m1 == satisfiable;

  const auto fixed = compile(FixedLengthConstraint{m + 1}, model.vocab());
  const auto conditional =
      oracle::exact_conditional(model, fixed, std::nullopt, limits_of(common));
  const Rat z = conditional ? conditional->normalizer : Rat(0);
  const bool counting_identity = z * pow2(m) == Rat(count);

  Json results;
  results["num_vars"] = m;
  results["num_clauses"] = static_cast<long long>(formula.clauses().size());
  results["satisfiable"] = satisfiable;
  results["model_count"] = count;
  results["map_sequence"] = model.vocab().render(map->first.tokens());
  results["map_probability"] = rational_field(map->second);
  results["z_fixed_length"] = rational_field(z);
  results["map_identity_holds"] = map_identity;
  results["counting_identity_holds"] = counting_identity;

  Json inputs;
  inputs["dimacs"] = dimacs_path;
  inputs["max_vars"] = max_vars;
  emit(common, Document::make("gadget-verify", std::move(inputs), std::move(results)).to_string());
  return (map_identity && counting_identity) ? kOk : kIdentity;
}

// ---------------------------------------------------------------------------
// map
// ---------------------------------------------------------------------------

int cmd_map(const Common& common, const std::string& engine, std::optional<int> horizon,
            int width, int max_steps) {
  const LoadedModel loaded = load_model(common);
  const auto constraint = load_constraint(common, loaded.model->vocab());
  std::optional<std::pair<CompleteSequence, Rat>> best;

  if (engine == "oracle") {
    std::optional<int> bound = horizon;
    if (!bound && constraint) bound = constraint->implied_horizon(loaded.model->vocab().eos());
    if (!bound)
      throw std::invalid_argument("--horizon is required when the constraint does not bound length");
    best = oracle::exact_map(*loaded.model, *bound, constraint ? &*constraint : nullptr,
                             limits_of(common));
  } else if (engine == "dynprog") {
    if (!loaded.is_markov) throw std::invalid_argument("--engine dynprog requires --model");
    if (!constraint) throw std::invalid_argument("--engine dynprog requires --constraint");
    const auto* markov = dynamic_cast<const MarkovModel*>(loaded.model.get());
    best = dynprog::viterbi_map(*markov, *constraint);
    if (common.check_oracle) {
      const auto reference =
          oracle::exact_map(*loaded.model,
                            *constraint->implied_horizon(loaded.model->vocab().eos()),
                            &*constraint, limits_of(common));
      if (best.has_value() != reference.has_value() ||
          (best && (best->first != reference->first || best->second != reference->second)))
        return oracle_mismatch(common, "dynprog MAP differs from oracle exact_map");
    }
  } else if (engine == "greedy" || engine == "beam") {
    if (!constraint) throw std::invalid_argument("decoder engines require --constraint");
    const auto outcome =
        engine == "greedy"
            ? decoders::greedy_decode(*loaded.model, *constraint, max_steps)
            : decoders::beam_decode(*loaded.model, *constraint, width, max_steps);
    if (outcome.ok())
      best = {*outcome.sequence, sequence_probability(*loaded.model, *outcome.sequence)};
    if (common.check_oracle && best) {
      if (!accepts(*constraint, best->first))
        return oracle_mismatch(common, "decoder output is not feasible");
      if (sequence_probability(*loaded.model, best->first) != best->second)
        return oracle_mismatch(common, "decoder probability is not the chain-rule product");
    }
  } else {
    throw std::invalid_argument("--engine must be oracle|dynprog|greedy|beam");
  }

  Json inputs;
  inputs["model"] = loaded.id;
  if (constraint) inputs["constraint"] = common.constraint_path;
  inputs["engine"] = engine;
  if (horizon) inputs["horizon"] = *horizon;
  if (engine == "beam") inputs["width"] = width;
  emit(common,
       Document::make("map", std::move(inputs), sequence_result(loaded.model->vocab(), best))
           .to_string());
  return kOk;
}

// ---------------------------------------------------------------------------
// z
// ---------------------------------------------------------------------------

int cmd_z(const Common& common, const std::string& engine, std::optional<int> horizon) {
  const LoadedModel loaded = load_model(common);
  const auto constraint = load_constraint(common, loaded.model->vocab());
  if (!constraint) throw std::invalid_argument("z requires --constraint");
  Rat z;

  if (engine == "oracle") {
    const auto conditional =
        oracle::exact_conditional(*loaded.model, *constraint, horizon, limits_of(common));
    z = conditional ? conditional->normalizer : Rat(0);
  } else if (engine == "dynprog") {
    if (!loaded.is_markov) throw std::invalid_argument("--engine dynprog requires --model");
    const auto* markov = dynamic_cast<const MarkovModel*>(loaded.model.get());
    z = dynprog::exact_z(*markov, *constraint);
    if (common.check_oracle) {
      const auto conditional =
          oracle::exact_conditional(*loaded.model, *constraint, horizon, limits_of(common));
      const Rat reference = conditional ? conditional->normalizer : Rat(0);
      if (z != reference)
        return oracle_mismatch(common, "dynprog Z = " + fraction_string(z) +
                                           " but oracle Z = " + fraction_string(reference));
    }
  } else {
    throw std::invalid_argument("--engine must be oracle|dynprog");
  }

  Json inputs;
  inputs["model"] = loaded.id;
  inputs["constraint"] = common.constraint_path;
  inputs["engine"] = engine;
  if (horizon) inputs["horizon"] = *horizon;
  Json results;
  results["z"] = rational_field(z);
  results["feasible"] = z > 0;
  emit(common, Document::make("z", std::move(inputs), std::move(results)).to_string());
  return kOk;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int cmd_sample(const Common& common, const std::string& engine, long long n, int max_attempts,
               int max_steps, std::optional<int> horizon) {
  const LoadedModel loaded = load_model(common);
  const auto constraint = load_constraint(common, loaded.model->vocab());
  if (!constraint) throw std::invalid_argument("sample requires --constraint");
  if (n < 1) throw std::invalid_argument("--n must be >= 1");
  const Vocabulary& vocab = loaded.model->vocab();

  std::optional<dynprog::ContinuationTable> table;
  if (engine == "exact") {
    if (!loaded.is_markov) throw std::invalid_argument("--engine exact requires --model");
    const auto* markov = dynamic_cast<const MarkovModel*>(loaded.model.get());
    table.emplace(*markov, *constraint);
    if (table->z() == 0) throw std::invalid_argument("the feasible set has mass zero");
  } else if (engine != "rejection" && engine != "masked") {
    throw std::invalid_argument("--engine must be exact|rejection|masked");
  }

  Json sequences = Json::array();
  long long dead_ends = 0, exhausted = 0, attempts_total = 0;
  const SplitMix64 master(common.seed);
  for (long long i = 0; i < n; ++i) {
    SplitMix64 rng = master.derive(static_cast<std::uint64_t>(i));
    if (engine == "exact") {
      sequences.push_back(vocab.render(dynprog::exact_constrained_sample(*table, rng).tokens()));
    } else if (engine == "rejection") {
      const auto outcome =
          decoders::rejection_sample(*loaded.model, *constraint, max_attempts, rng, max_steps);
      attempts_total += outcome.attempts;
      if (outcome.ok()) sequences.push_back(vocab.render(outcome.sequence->tokens()));
      else ++exhausted;
    } else {
      const auto outcome =
          decoders::masked_ancestral_sample(*loaded.model, *constraint, rng, max_steps);
      if (outcome.ok()) sequences.push_back(vocab.render(outcome.sequence->tokens()));
      else ++dead_ends;
    }
  }

  if (common.check_oracle) {
    const auto conditional =
        oracle::exact_conditional(*loaded.model, *constraint, horizon, limits_of(common));
    for (const auto& rendered : sequences) {
      bool found = false;
      if (conditional) {
        for (const auto& [sequence, probability] : conditional->support) {
          if (vocab.render(sequence.tokens()) == rendered.get<std::string>()) found = true;
        }
      }
      if (!found)
        return oracle_mismatch(common, "sampled sequence '" + rendered.get<std::string>() +
                                           "' is outside the oracle conditional support");
    }
  }

  Json inputs;
  inputs["model"] = loaded.id;
  inputs["constraint"] = common.constraint_path;
  inputs["engine"] = engine;
  inputs["n"] = n;
  inputs["seed"] = common.seed;
  if (engine == "rejection") inputs["max_attempts"] = max_attempts;
  Json results;
  results["sequences"] = std::move(sequences);
  if (engine == "masked") results["dead_ends"] = dead_ends;
  if (engine == "rejection") {
    results["exhausted"] = exhausted;
    results["attempts_total"] = attempts_total;
  }
  emit(common, Document::make("sample", std::move(inputs), std::move(results)).to_string());
  return kOk;
}

// ---------------------------------------------------------------------------
// threshold
// ---------------------------------------------------------------------------

int cmd_threshold(const Common& common, int length, const std::string& tau_text,
                  std::optional<int> horizon) {
  const LoadedModel loaded = load_model(common);
  const Rat tau = parse_rational(tau_text);
  const int bound = horizon.value_or(length);
  const bool answer =
      oracle::map_threshold(*loaded.model, length, tau, bound, limits_of(common));
  const auto witness = oracle::best_of_length(*loaded.model, length, limits_of(common));

  Json inputs;
  inputs["model"] = loaded.id;
  inputs["length"] = length;
  inputs["tau"] = fraction_string(tau);
  Json results;
  results["answer"] = answer;
  if (witness) {
    results["witness"] = loaded.model->vocab().render(witness->first.tokens());
    results["witness_probability"] = rational_field(witness->second);
    results["certificate_ok"] = oracle::certificate_check(*loaded.model, witness->first, tau);
  }
  emit(common, Document::make("threshold", std::move(inputs), std::move(results)).to_string());
  return kOk;
}

// ---------------------------------------------------------------------------
// bias
// ---------------------------------------------------------------------------

int cmd_bias(const Common& common, const std::string& decoder_name, long long trials, int width,
             int max_attempts, int max_steps, std::optional<int> horizon) {
  const LoadedModel loaded = load_model(common);
  const auto constraint = load_constraint(common, loaded.model->vocab());
  if (!constraint) throw std::invalid_argument("bias requires --constraint");

  decoders::Config config;
  config.kind = decoders::parse_kind(decoder_name);
  config.beam_width = width;
  config.max_attempts = max_attempts;
  config.max_steps = max_steps;

  biaslab::Instance instance{loaded.model.get(), &*constraint, loaded.id,
                             common.constraint_path, horizon};
  const biaslab::BiasReport report =
      biaslab::run_experiment(instance, config, trials, common.seed);

  if (common.check_oracle) {
    const auto conditional =
        oracle::exact_conditional(*loaded.model, *constraint, horizon, limits_of(common));
    if (!conditional) return oracle_mismatch(common, "oracle finds the instance infeasible");
    if (static_cast<long long>(conditional->support.size()) != report.exact_support_size)
      return oracle_mismatch(common, "support size differs between engines");
    for (std::size_t i = 0; i < conditional->support.size(); ++i) {
      if (conditional->support[i].first != report.table[i].sequence ||
          conditional->support[i].second != report.table[i].exact_probability)
        return oracle_mismatch(common, "conditional law differs between engines");
    }
  }

  if (common.format == "csv") {
    emit(common, report::bias_report_csv(report, loaded.model->vocab()));
    return kOk;
  }
  Json inputs;
  inputs["model"] = loaded.id;
  inputs["constraint"] = common.constraint_path;
  inputs["decoder"] = config.id();
  inputs["trials"] = trials;
  inputs["seed"] = common.seed;
  emit(common, Document::make("bias", std::move(inputs),
                              report::bias_report_json(report, loaded.model->vocab()))
                   .to_string());
  return kOk;
}

// ---------------------------------------------------------------------------
// validate-report
// ---------------------------------------------------------------------------

int cmd_validate_report(const std::string& path) {
  std::string text;
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    text = buffer.str();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open report file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  const Document document = Document::parse(text);
  std::cout << "valid " << document.doc["command"].get<std::string>() << " report\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{
      "Exact constrained inference for finite-vocabulary autoregressive models:\n"
      "CNF-derived models, exact MAP / normalization / conditional sampling, and\n"
      "bias measurement of heuristic constrained decoders."};
  app.require_subcommand(1);
  Common common;

  // gadget-verify
  std::string dimacs_path;
  int max_vars = 24;
  auto* verify = app.add_subcommand(
      "gadget-verify", "Check the MAP and counting identities of a CNF-derived model");
  verify->add_option("dimacs", dimacs_path, "DIMACS CNF file")->required();
  verify->add_option("--max-vars", max_vars, "Truth-table enumeration cap");
  add_output_flags(verify, common);
  verify->add_option("--budget", common.budget, "Enumeration budget in visited prefixes");

  // map
  std::string map_engine = "oracle";
  std::optional<int> map_horizon;
  int map_width = 1, map_max_steps = 64;
  auto* map_cmd = app.add_subcommand("map", "Most probable (constrained) complete sequence");
  add_model_flags(map_cmd, common);
  map_cmd->add_option("--constraint", common.constraint_path, "Constraint file");
  map_cmd->add_option("--engine", map_engine, "oracle|dynprog|greedy|beam");
  map_cmd->add_option("--horizon", map_horizon, "Enumeration horizon (oracle engine)");
  map_cmd->add_option("--width", map_width, "Beam width");
  map_cmd->add_option("--max-steps", map_max_steps, "Decoder step limit");
  map_cmd->add_flag("--check-oracle", common.check_oracle, "Re-check through the oracle");
  add_output_flags(map_cmd, common);
  map_cmd->add_option("--budget", common.budget, "Enumeration budget in visited prefixes");

  // z
  std::string z_engine = "dynprog";
  std::optional<int> z_horizon;
  auto* z_cmd = app.add_subcommand("z", "Constrained normalization constant");
  add_model_flags(z_cmd, common);
  z_cmd->add_option("--constraint", common.constraint_path, "Constraint file");
  z_cmd->add_option("--engine", z_engine, "oracle|dynprog");
  z_cmd->add_option("--horizon", z_horizon, "Enumeration horizon (oracle engine)");
  z_cmd->add_flag("--check-oracle", common.check_oracle, "Re-check through the oracle");
  add_output_flags(z_cmd, common);
  z_cmd->add_option("--budget", common.budget, "Enumeration budget in visited prefixes");

  // sample
  std::string sample_engine = "exact";
  long long sample_n = 1;
  int sample_max_attempts = 1000, sample_max_steps = 64;
  std::optional<int> sample_horizon;
  auto* sample_cmd = app.add_subcommand("sample", "Draw constrained samples");
  add_model_flags(sample_cmd, common);
  sample_cmd->add_option("--constraint", common.constraint_path, "Constraint file");
  sample_cmd->add_option("--engine", sample_engine, "exact|rejection|masked");
  sample_cmd->add_option("--n", sample_n, "Number of draws");
  sample_cmd->add_option("--seed", common.seed, "Master seed");
  sample_cmd->add_option("--max-attempts", sample_max_attempts, "Rejection attempt cap");
  sample_cmd->add_option("--max-steps", sample_max_steps, "Per-draw step limit");
  sample_cmd->add_option("--horizon", sample_horizon, "Oracle horizon for --check-oracle");
  sample_cmd->add_flag("--check-oracle", common.check_oracle, "Re-check through the oracle");
  add_output_flags(sample_cmd, common);
  sample_cmd->add_option("--budget", common.budget, "Enumeration budget in visited prefixes");

  // threshold
  int threshold_length = 1;
  std::string threshold_tau = "0";
  std::optional<int> threshold_horizon;
  auto* threshold_cmd =
      app.add_subcommand("threshold", "Does a length-n sequence reach probability tau?");
  add_model_flags(threshold_cmd, common);
  threshold_cmd->add_option("--length", threshold_length, "Required sequence length")->required();
  threshold_cmd->add_option("--tau", threshold_tau, "Probability threshold, as p/q")->required();
  threshold_cmd->add_option("--horizon", threshold_horizon, "Enumeration horizon (>= length)");
  add_output_flags(threshold_cmd, common);
  threshold_cmd->add_option("--budget", common.budget, "Enumeration budget in visited prefixes");

  // bias
  std::string bias_decoder = "masked";
  long long bias_trials = 10000;
  int bias_width = 1, bias_max_attempts = 1000, bias_max_steps = 64;
  std::optional<int> bias_horizon;
  auto* bias_cmd =
      app.add_subcommand("bias", "Compare a decoder's output law to the exact conditional");
  add_model_flags(bias_cmd, common);
  bias_cmd->add_option("--constraint", common.constraint_path, "Constraint file");
  bias_cmd->add_option("--decoder", bias_decoder, "greedy|beam|rejection|masked|exact");
  bias_cmd->add_option("--trials", bias_trials, "Number of trials");
  bias_cmd->add_option("--seed", common.seed, "Master seed");
  bias_cmd->add_option("--width", bias_width, "Beam width");
  bias_cmd->add_option("--max-attempts", bias_max_attempts, "Rejection attempt cap");
  bias_cmd->add_option("--max-steps", bias_max_steps, "Per-trial step limit");
  bias_cmd->add_option("--horizon", bias_horizon, "Oracle horizon for non-Markov models");
  bias_cmd->add_flag("--check-oracle", common.check_oracle, "Re-check through the oracle");
  add_output_flags(bias_cmd, common);
  bias_cmd->add_option("--budget", common.budget, "Enumeration budget in visited prefixes");

  // validate-report
  std::string report_path;
  auto* validate_cmd =
      app.add_subcommand("validate-report", "Parse and validate an emitted report");
  validate_cmd->add_option("report", report_path, "Report file, or - for stdin")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (verify->parsed()) return cmd_gadget_verify(common, dimacs_path, max_vars);
    if (map_cmd->parsed())
      return cmd_map(common, map_engine, map_horizon, map_width, map_max_steps);
    if (z_cmd->parsed()) return cmd_z(common, z_engine, z_horizon);
    if (sample_cmd->parsed())
      return cmd_sample(common, sample_engine, sample_n, sample_max_attempts, sample_max_steps,
                        sample_horizon);
    if (threshold_cmd->parsed())
      return cmd_threshold(common, threshold_length, threshold_tau, threshold_horizon);
    if (bias_cmd->parsed())
      return cmd_bias(common, bias_decoder, bias_trials, bias_width, bias_max_attempts,
                      bias_max_steps, bias_horizon);
    if (validate_cmd->parsed()) return cmd_validate_report(report_path);
    throw std::logic_error("no subcommand dispatched");
  } catch (const oracle::BudgetExceededError& e) {
    std::cerr << "budget refused: " << e.what() << "\n";
    return kBudget;
  } catch (const std::length_error& e) {
    std::cerr << "budget refused: " << e.what() << "\n";
    return kBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace argen::cli
