#include "sensekit/eval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sensekit/errors.hpp"
#include "sensekit/rng.hpp"

namespace sensekit {

using ordered_json = nlohmann::ordered_json;

void AnswerSet::answer(const std::string& id, const std::string& sense) {
    by_id[id] = sense;
}

std::optional<std::string> AnswerSet::lookup(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end()) return std::nullopt;
    return it->second;
}

AnswerSet AnswerSet::load(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw InputError("cannot open answer file '" + path + "'");
    AnswerSet answers;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": expected 'instance-id<TAB>sense-id'");
        }
        answers.by_id[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return answers;
}

std::string AnswerSet::to_text() const {
    std::ostringstream out;
    for (const auto& [id, sense] : by_id) {
        if (id.find('\t') != std::string::npos) {
            throw InputError("answer id '" + id + "' contains a tab");
        }
        out << id << "\t" << sense << "\n";
    }
    return out.str();
}

void AnswerSet::save(const std::string& path) const {
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw InputError("cannot open '" + path + "' for writing");
    file << to_text();
}

double ScoreCounts::precision() const {
    return attempted == 0 ? 0.0
                          : 100.0 * static_cast<double>(correct) /
                                static_cast<double>(attempted);
}

double ScoreCounts::recall() const {
    return total == 0 ? 0.0
                      : 100.0 * static_cast<double>(correct) /
                            static_cast<double>(total);
}

double ScoreCounts::f1() const {
    double p = precision();
    double r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double ScoreCounts::accuracy() const {
    return recall();
}

namespace {

bool answer_correct(const Instance& inst, const std::string& sense) {
    return std::find(inst.gold_senses.begin(), inst.gold_senses.end(), sense) !=
           inst.gold_senses.end();
}

void tally(ScoreCounts& counts, bool attempted, bool correct) {
    counts.total += 1;
    if (attempted) counts.attempted += 1;
    if (correct) counts.correct += 1;
}

} // namespace

EvalReport score(const AnswerSet& answers, const std::vector<Instance>& gold) {
    if (gold.empty()) throw InputError("score: empty gold set");
    std::map<std::string, const Instance*> by_id;
    for (const Instance& inst : gold) by_id.emplace(inst.id, &inst);
    for (const auto& [id, _] : answers.by_id) {
        if (!by_id.count(id)) {
            throw InputError("score: answer for unknown instance id '" + id + "'");
        }
    }

    EvalReport report;
    for (const Instance& inst : gold) {
        std::optional<std::string> sense = answers.lookup(inst.id);
        bool attempted = sense.has_value();
        bool correct = attempted && answer_correct(inst, *sense);
        tally(report.overall, attempted, correct);
        tally(report.per_lexelt[inst.lexelt.key()], attempted, correct);
        if (inst.genre) tally(report.per_genre[*inst.genre], attempted, correct);
    }
    return report;
}

namespace {

std::string fixed1(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << v;
    return out.str();
}

void table_section(std::ostringstream& out, const std::string& title,
                   const std::map<std::string, ScoreCounts>& rows) {
    if (rows.empty()) return;
    out << "\n" << title << "\n";
    for (const auto& [name, counts] : rows) {
        out << "  " << std::left << std::setw(24) << name << " P=" << fixed1(counts.precision())
            << " R=" << fixed1(counts.recall()) << " F1=" << fixed1(counts.f1())
            << " (" << counts.correct << "/" << counts.attempted << "/" << counts.total
            << " correct/attempted/total)\n";
    }
}

ordered_json counts_json(const ScoreCounts& counts) {
    ordered_json j;
    j["precision"] = counts.precision();
    j["recall"] = counts.recall();
    j["f1"] = counts.f1();
    j["accuracy"] = counts.accuracy();
    j["attempted"] = counts.attempted;
    j["correct"] = counts.correct;
    j["total"] = counts.total;
    return j;
}

} // namespace

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << "instances: " << overall.total << "  attempted: " << overall.attempted
        << "  correct: " << overall.correct << "\n";
    out << "precision: " << fixed1(precision()) << "  recall: " << fixed1(recall())
        << "  F1: " << fixed1(f1()) << "  accuracy: " << fixed1(accuracy()) << "\n";
    table_section(out, "per-genre", per_genre);
    table_section(out, "per-lexelt", per_lexelt);
    return out.str();
}

std::string EvalReport::to_json_text() const {
    ordered_json j;
    j["overall"] = counts_json(overall);
    ordered_json lexelts = ordered_json::object();
    for (const auto& [name, counts] : per_lexelt) lexelts[name] = counts_json(counts);
    j["per_lexelt"] = std::move(lexelts);
    ordered_json genres = ordered_json::object();
    for (const auto& [name, counts] : per_genre) genres[name] = counts_json(counts);
    j["per_genre"] = std::move(genres);
    return j.dump(2);
}

SignificanceResult bootstrap_significance(const AnswerSet& answers_a,
                                          const AnswerSet& answers_b,
                                          const std::vector<Instance>& gold,
                                          std::size_t resamples, std::uint64_t seed,
                                          const std::string& name_a,
                                          const std::string& name_b) {
    if (gold.empty()) throw InputError("bootstrap: empty gold set");
    if (resamples == 0) throw InputError("bootstrap: need at least one resample");

    // Correctness masks in gold order; score() also validates the id sets.
    EvalReport full_a = score(answers_a, gold);
    EvalReport full_b = score(answers_b, gold);

    const std::size_t n = gold.size();
    std::vector<ScoreCounts> per_instance_a(n), per_instance_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Instance& inst = gold[i];
        auto mask = [&](const AnswerSet& answers, ScoreCounts& counts) {
            std::optional<std::string> sense = answers.lookup(inst.id);
            counts.total = 1;
            counts.attempted = sense ? 1 : 0;
            counts.correct = sense && answer_correct(inst, *sense) ? 1 : 0;
        };
        mask(answers_a, per_instance_a[i]);
        mask(answers_b, per_instance_b[i]);
    }

    SignificanceResult result;
    result.system_a = name_a;
    result.system_b = name_b;
    result.score_a = full_a.f1();
    result.score_b = full_b.f1();
    result.resamples = resamples;
    result.seed = seed;

    const bool b_better = full_b.f1() > full_a.f1();
    const bool tied = full_a.f1() == full_b.f1();
    result.better = tied ? "" : (b_better ? name_b : name_a);
    result.observed_diff = std::abs(full_b.f1() - full_a.f1());
    const auto& hi = b_better || tied ? per_instance_b : per_instance_a;
    const auto& lo = b_better || tied ? per_instance_a : per_instance_b;

    std::size_t non_positive = 0;
    for (std::size_t r = 0; r < resamples; ++r) {
        // Sub-seed per resample: the outcome does not depend on scheduling.
        Rng rng(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (r + 1))));
        ScoreCounts counts_hi, counts_lo;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t pick = rng.below(n);
            counts_hi.total += hi[pick].total;
            counts_hi.attempted += hi[pick].attempted;
            counts_hi.correct += hi[pick].correct;
            counts_lo.total += lo[pick].total;
            counts_lo.attempted += lo[pick].attempted;
            counts_lo.correct += lo[pick].correct;
        }
        if (counts_hi.f1() - counts_lo.f1() <= 0.0) ++non_positive;
    }
    result.p_value = static_cast<double>(non_positive) / static_cast<double>(resamples);
    result.significant = !tied && result.p_value < 0.05;
    return result;
}

AnswerSet predict_all(const std::vector<Instance>& instances,
                      const HiddenLookup& lookup, const HeadModel& model) {
    AnswerSet answers;
    for (const Instance& inst : instances) {
        HiddenStack stack = lookup(inst.id);
        Prediction pred = predict_with_backoff(stack, inst.target_index, model,
                                               inst.lexelt);
        if (pred.sense) answers.answer(inst.id, *pred.sense);
    }
    return answers;
}

AnswerSet mfs_answers(const std::vector<Instance>& instances,
                      const SenseInventory& inventory) {
    AnswerSet answers;
    for (const Instance& inst : instances) {
        if (auto sense = most_frequent_sense(inventory, inst.lexelt)) {
            answers.answer(inst.id, *sense);
        }
    }
    return answers;
}

ExperimentResult run_experiment(const std::vector<Instance>& train_set,
                                const std::vector<Instance>& dev_set,
                                const std::vector<Instance>& test_set,
                                const HiddenLookup& lookup,
                                const SenseInventory& inventory,
                                const ExperimentConfig& config) {
    if (config.seeds.empty()) throw InputError("experiment: no seeds given");
    ExperimentResult result;
    for (std::uint64_t seed : config.seeds) {
        HeadModel model;
        if (is_trainable(config.variant)) {
            TrainConfig train_config = config.train;
            train_config.seed = seed;
            if (!dev_set.empty()) {
                model = train(train_set, dev_set, lookup, inventory, config.variant,
                              train_config)
                            .model;
            } else if (config.epoch_transfer) {
                model = train_with_epoch_transfer(train_set, config.dev_ratio, lookup,
                                                  inventory, config.variant,
                                                  train_config)
                            .result.model;
            } else {
                model = train(train_set, {}, lookup, inventory, config.variant,
                              train_config)
                            .model;
            }
        } else {
            HiddenStack probe = lookup(train_set.front().id);
            model = init_head_model(HeadVariant::knn, inventory, probe.width,
                                    probe.num_layers, seed);
            std::vector<const HiddenStack*> stacks;
            std::vector<HiddenStack> storage;
            storage.reserve(train_set.size());
            for (const Instance& inst : train_set) storage.push_back(lookup(inst.id));
            for (const HiddenStack& s : storage) stacks.push_back(&s);
            model.knn = build_knn_index(train_set, stacks);
        }
        AnswerSet answers = predict_all(test_set, lookup, model);
        result.per_run.push_back(score(answers, test_set));
        result.answers_per_run.push_back(std::move(answers));
    }
    for (const EvalReport& report : result.per_run) {
        result.mean_f1 += report.f1();
        result.mean_accuracy += report.accuracy();
    }
    result.mean_f1 /= static_cast<double>(result.per_run.size());
    result.mean_accuracy /= static_cast<double>(result.per_run.size());
    return result;
}

} // namespace sensekit
