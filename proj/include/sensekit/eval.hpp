#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sensekit/corpus.hpp"
#include "sensekit/trainer.hpp"

namespace sensekit {

/// instance id -> predicted sense. Abstentions are simply absent.
struct AnswerSet {
    std::map<std::string, std::string> by_id;

    void answer(const std::string& id, const std::string& sense);
    std::optional<std::string> lookup(const std::string& id) const;

    static AnswerSet load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_text() const;
};

struct ScoreCounts {
    std::uint64_t total = 0;
    std::uint64_t attempted = 0;
    std::uint64_t correct = 0;

    double precision() const; // percent
    double recall() const;    // percent
    double f1() const;        // percent
    double accuracy() const;  // percent
};

/// Micro-averaged scores in percent, with per-lexelt and per-genre tables.
/// With full coverage precision = recall = accuracy = F1.
struct EvalReport {
    ScoreCounts overall;
    std::map<std::string, ScoreCounts> per_lexelt;
    std::map<std::string, ScoreCounts> per_genre;

    double precision() const { return overall.precision(); }
    double recall() const { return overall.recall(); }
    double f1() const { return overall.f1(); }
    double accuracy() const { return overall.accuracy(); }

    std::string to_table() const;
    std::string to_json_text() const;
};

/// A prediction is correct iff it matches any gold sense of the instance.
/// Answers for unknown instance ids are an error.
EvalReport score(const AnswerSet& answers, const std::vector<Instance>& gold);

struct SignificanceResult {
    std::string system_a;
    std::string system_b;
    double score_a = 0.0;      // full-set F1, percent
    double score_b = 0.0;
    double observed_diff = 0.0; // better minus worse
    std::string better;         // name of the higher-scoring system; empty if tied
    double p_value = 1.0;
    bool significant = false;   // p < 0.05 and not degenerate
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
};

/// One-sided bootstrap test: instances are resampled with replacement; with
/// B the higher-scoring system on the full set, p is the proportion of
/// resamples where score(B) - score(A) <= 0. Tied systems are degenerate and
/// never significant. Deterministic under the seed (per-resample sub-seeds).
SignificanceResult bootstrap_significance(const AnswerSet& answers_a,
                                          const AnswerSet& answers_b,
                                          const std::vector<Instance>& gold,
                                          std::size_t resamples = 10000,
                                          std::uint64_t seed = 1,
                                          const std::string& name_a = "A",
                                          const std::string& name_b = "B");

struct ExperimentConfig {
    HeadVariant variant = HeadVariant::simple;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    TrainConfig train;
    bool epoch_transfer = false; // used when no dev set is supplied
    double dev_ratio = 0.2;
};

struct ExperimentResult {
    std::vector<EvalReport> per_run;
    std::vector<AnswerSet> answers_per_run;
    double mean_f1 = 0.0;
    double mean_accuracy = 0.0;
};

/// Trains (where applicable) and evaluates once per seed; reports per-run
/// and arithmetic-mean scores. Deterministic per seed.
ExperimentResult run_experiment(const std::vector<Instance>& train_set,
                                const std::vector<Instance>& dev_set,
                                const std::vector<Instance>& test_set,
                                const HiddenLookup& lookup,
                                const SenseInventory& inventory,
                                const ExperimentConfig& config);

/// Predictions with MFS backoff for a whole test set.
AnswerSet predict_all(const std::vector<Instance>& instances,
                      const HiddenLookup& lookup, const HeadModel& model);

/// MFS baseline answers straight from the inventory.
AnswerSet mfs_answers(const std::vector<Instance>& instances,
                      const SenseInventory& inventory);

} // namespace sensekit
