#pragma once

#include "argen/decoders.hpp"
#include "argen/dynprog.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace argen {

// Experiment harness quantifying decoder bias: runs a decoder at scale and
// compares its empirical output law against the exact conditional (computed
// by dynprog for Markov models, by the oracle otherwise). All frequencies,
// coverage, and TV are exact rationals on the counts; the lone float is the
// display-only KL approximation.
namespace biaslab {

struct Instance {
  const ArModel* model = nullptr;
  const ConstraintAutomaton* constraint = nullptr;
  std::string model_id;
  std::string constraint_id;
  std::optional<int> horizon;  // for oracle-side references without an implied bound
};

struct SequenceRow {
  CompleteSequence sequence;
  Rat exact_probability;       // conditional
  Rat empirical_frequency;     // count / samples_feasible
  long long count = 0;
};

struct BiasReport {
  std::string model_id;
  std::string constraint_id;
  std::string decoder_id;
  long long exact_support_size = 0;
  long long samples_requested = 0;
  long long samples_feasible = 0;
  long long dead_ends = 0;
  long long rejections = 0;
  Rat coverage;          // distinct feasible sequences observed / support size
  Rat tv_distance;       // vs the exact conditional, over the support
  bool kl_defined = false;
  double kl_empirical_to_exact = 0.0;  // display-only approximation
  std::uint64_t seed = 0;
  std::vector<SequenceRow> table;      // canonical order
};

// Deterministic given the seed: trial t uses the derived stream t. Refuses
// (throws std::invalid_argument) when the instance has no feasible mass or
// the support is too large for an exact reference.
BiasReport run_experiment(const Instance& instance, const decoders::Config& decoder,
                          long long num_trials, std::uint64_t seed);

struct SweepResult {
  std::vector<BiasReport> reports;
  std::vector<std::string> failures;  // per-pair refusals, not fatal
};

// One report per (instance, decoder) pair, pair p seeded with stream p.
SweepResult sweep(std::span<const Instance> instances,
                  std::span<const decoders::Config> decoder_configs, long long num_trials,
                  std::uint64_t seed);

}  // namespace biaslab
}  // namespace argen
