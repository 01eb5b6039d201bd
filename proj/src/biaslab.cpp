#include "argen/biaslab.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace argen {
namespace biaslab {

namespace {

constexpr std::size_t kMaxSupport = 50'000;

// The exact conditional law: dynprog when the model is a Markov table,
// otherwise oracle enumeration.
std::vector<std::pair<CompleteSequence, Rat>> reference_law(const Instance& instance) {
  const auto* markov = dynamic_cast<const MarkovModel*>(instance.model);
  if (markov) {
    dynprog::ContinuationTable table(*markov, *instance.constraint);
    if (table.z() == 0)
      throw std::invalid_argument("instance '" + instance.model_id + "' x '" +
                                  instance.constraint_id +
                                  "' is infeasible; there is no conditional law to compare");
    return dynprog::enumerate_feasible(table, kMaxSupport);
  }
  const auto conditional =
      oracle::exact_conditional(*instance.model, *instance.constraint, instance.horizon);
  if (!conditional)
    throw std::invalid_argument("instance '" + instance.model_id + "' x '" +
                                instance.constraint_id +
                                "' is infeasible; there is no conditional law to compare");
  if (conditional->support.size() > kMaxSupport)
    throw std::invalid_argument("instance too large for an exact reference: support has " +
                                std::to_string(conditional->support.size()) + " sequences");
  return conditional->support;
}

}  // namespace

BiasReport run_experiment(const Instance& instance, const decoders::Config& decoder,
                          long long num_trials, std::uint64_t seed) {
  if (!instance.model || !instance.constraint)
    throw std::invalid_argument("run_experiment: instance is missing a model or constraint");
  if (num_trials < 1) throw std::invalid_argument("run_experiment: num_trials must be >= 1");
  decoder.validate();

  const auto support = reference_law(instance);
  std::map<CompleteSequence, Rat, CanonicalLess> exact_law;
  for (const auto& [sequence, probability] : support) exact_law.emplace(sequence, probability);

  // The exact engine shares one table across trials.
  std::optional<dynprog::ContinuationTable> table;
  if (decoder.kind == decoders::Kind::exact) {
    const auto* markov = dynamic_cast<const MarkovModel*>(instance.model);
    if (!markov)
      throw std::invalid_argument("the exact decoder requires a bounded-state (Markov) model");
    table.emplace(*markov, *instance.constraint);
  }

  BiasReport report;
  report.model_id = instance.model_id;
  report.constraint_id = instance.constraint_id;
  report.decoder_id = decoder.id();
  report.exact_support_size = static_cast<long long>(support.size());
  report.samples_requested = num_trials;
  report.seed = seed;

  std::map<CompleteSequence, long long, CanonicalLess> counts;
  const SplitMix64 master(seed);
  for (long long trial = 0; trial < num_trials; ++trial) {
    SplitMix64 rng = master.derive(static_cast<std::uint64_t>(trial));
    std::optional<CompleteSequence> sample;
    switch (decoder.kind) {
      case decoders::Kind::exact:
        sample = dynprog::exact_constrained_sample(*table, rng);
        break;
      case decoders::Kind::greedy: {
        auto outcome = decoders::greedy_decode(*instance.model, *instance.constraint,
                                               decoder.max_steps);
        if (outcome.ok()) sample = std::move(outcome.sequence);
        else ++report.dead_ends;
        break;
      }
      case decoders::Kind::beam: {
        auto outcome = decoders::beam_decode(*instance.model, *instance.constraint,
                                             decoder.beam_width, decoder.max_steps);
        if (outcome.ok()) sample = std::move(outcome.sequence);
        else ++report.dead_ends;
        break;
      }
      case decoders::Kind::rejection: {
        auto outcome = decoders::rejection_sample(*instance.model, *instance.constraint,
                                                  decoder.max_attempts, rng, decoder.max_steps);
        if (outcome.ok()) {
          report.rejections += outcome.attempts - 1;
          sample = std::move(outcome.sequence);
        } else {
          report.rejections += outcome.attempts;
        }
        break;
      }
      case decoders::Kind::masked_ancestral: {
        auto outcome = decoders::masked_ancestral_sample(*instance.model, *instance.constraint,
                                                         rng, decoder.max_steps);
        if (outcome.ok()) sample = std::move(outcome.sequence);
        else ++report.dead_ends;
        break;
      }
    }
    if (sample) {
      ++report.samples_feasible;
      ++counts[*sample];
    }
  }

  // Decoders only emit positive-probability feasible sequences, so observed
  // outputs always lie inside the exact support.
  for (const auto& [sequence, count] : counts) {
    if (!exact_law.count(sequence))
      throw std::logic_error("decoder produced a sequence outside the exact support: " +
                             instance.model->vocab().render(sequence.tokens()));
  }

  report.coverage = report.exact_support_size == 0
                        ? Rat(0)
                        : Rat(static_cast<long long>(counts.size()), report.exact_support_size);
  Rat l1 = 0;
  for (const auto& [sequence, exact_probability] : exact_law) {
    const auto it = counts.find(sequence);
    const long long count = it == counts.end() ? 0 : it->second;
    const Rat empirical =
        report.samples_feasible == 0 ? Rat(0) : Rat(count, report.samples_feasible);
    const Rat diff = empirical - exact_probability;
    l1 += diff < 0 ? -diff : diff;
    report.table.push_back(SequenceRow{sequence, exact_probability, empirical, count});
  }
  report.tv_distance = report.samples_feasible == 0 ? Rat(1) : l1 / 2;

  report.kl_defined = report.samples_feasible > 0 && report.coverage == 1;
  if (report.kl_defined) {
    double kl = 0.0;
    for (const auto& row : report.table) {
      if (row.count == 0) continue;
      const double f = row.empirical_frequency.convert_to<double>();
      const double p = row.exact_probability.convert_to<double>();
      kl += f * std::log(f / p);
    }
    report.kl_empirical_to_exact = kl;
  }
  return report;
}

SweepResult sweep(std::span<const Instance> instances,
                  std::span<const decoders::Config> decoder_configs, long long num_trials,
                  std::uint64_t seed) {
  SweepResult result;
  const SplitMix64 master(seed);
  std::uint64_t pair_index = 0;
  for (const Instance& instance : instances) {
    for (const decoders::Config& decoder : decoder_configs) {
      const std::uint64_t pair_seed = master.derive(pair_index).seed();
      ++pair_index;
      try {
        result.reports.push_back(run_experiment(instance, decoder, num_trials, pair_seed));
      } catch (const std::exception& e) {
        result.failures.push_back(instance.model_id + " x " + instance.constraint_id + " x " +
                                  decoder.id() + ": " + e.what());
      }
    }
  }
  return result;
}

}  // namespace biaslab
}  // namespace argen
