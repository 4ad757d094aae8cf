#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "sensekit/errors.hpp"
#include "sensekit/eval.hpp"
#include "sensekit/rng.hpp"
#include "synthetic.hpp"

using namespace sensekit;
using sensekit::testing::SyntheticSpec;
using sensekit::testing::make_synthetic;

namespace {

std::vector<Instance> toy_gold(std::size_t count, const std::string& prefix = "i") {
    std::vector<Instance> gold;
    for (std::size_t i = 0; i < count; ++i) {
        Instance inst;
        inst.id = prefix + std::to_string(i);
        inst.words = {"w"};
        inst.target_index = 0;
        inst.lexelt.lemma = "w";
        inst.gold_senses = {"good"};
        gold.push_back(inst);
    }
    return gold;
}

AnswerSet answers_for(const std::vector<Instance>& gold, std::size_t correct,
                      std::size_t wrong) {
    AnswerSet answers;
    std::size_t i = 0;
    for (; i < correct; ++i) answers.answer(gold[i].id, "good");
    for (; i < correct + wrong; ++i) answers.answer(gold[i].id, "bad");
    return answers;
}

} // namespace

TEST_CASE("all correct scores one hundred") {
    auto gold = toy_gold(4);
    EvalReport report = score(answers_for(gold, 4, 0), gold);
    CHECK(report.f1() == doctest::Approx(100.0));
    CHECK(report.accuracy() == doctest::Approx(100.0));
}

TEST_CASE("three of four correct with full coverage is 75") {
    auto gold = toy_gold(4);
    EvalReport report = score(answers_for(gold, 3, 1), gold);
    CHECK(report.f1() == doctest::Approx(75.0));
    CHECK(report.precision() == doctest::Approx(75.0));
    CHECK(report.recall() == doctest::Approx(75.0));
}

TEST_CASE("abstentions lower recall but not precision") {
    auto gold = toy_gold(4);
    EvalReport report = score(answers_for(gold, 2, 0), gold); // 2 answered, 2 abstained
    CHECK(report.precision() == doctest::Approx(100.0));
    CHECK(report.recall() == doctest::Approx(50.0));
    CHECK(report.f1() == doctest::Approx(100.0 * 2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("multi-gold instances accept any listed sense") {
    auto gold = toy_gold(2);
    gold[0].gold_senses = {"a", "b"};
    AnswerSet answers;
    answers.answer(gold[0].id, "b");
    answers.answer(gold[1].id, "good");
    EvalReport report = score(answers, gold);
    CHECK(report.accuracy() == doctest::Approx(100.0));
}

TEST_CASE("answers for unknown ids are rejected") {
    auto gold = toy_gold(2);
    AnswerSet answers;
    answers.answer("nonexistent", "x");
    CHECK_THROWS_AS(score(answers, gold), InputError);
    CHECK_THROWS_AS(score(AnswerSet{}, {}), InputError);
}

TEST_CASE("score is invariant to instance order") {
    auto gold = toy_gold(6);
    AnswerSet answers = answers_for(gold, 4, 1);
    EvalReport forward_report = score(answers, gold);
    std::vector<Instance> reversed(gold.rbegin(), gold.rend());
    EvalReport reversed_report = score(answers, reversed);
    CHECK(forward_report.f1() == reversed_report.f1());
    CHECK(forward_report.precision() == reversed_report.precision());
    CHECK(forward_report.recall() == reversed_report.recall());
}

TEST_CASE("full coverage makes F1 equal accuracy exactly") {
    Rng rng(2);
    auto gold = toy_gold(20);
    for (int trial = 0; trial < 20; ++trial) {
        AnswerSet answers;
        for (const Instance& inst : gold) {
            answers.answer(inst.id, rng.below(2) ? "good" : "bad");
        }
        EvalReport report = score(answers, gold);
        CHECK(report.f1() == doctest::Approx(report.accuracy()));
    }
}

TEST_CASE("adding a correct answer never lowers any score") {
    auto gold = toy_gold(10);
    AnswerSet partial = answers_for(gold, 3, 4); // 3 abstentions remain
    EvalReport before = score(partial, gold);
    AnswerSet extended = partial;
    extended.answer(gold[9].id, "good");
    EvalReport after = score(extended, gold);
    CHECK(after.precision() >= before.precision());
    CHECK(after.recall() >= before.recall());
    CHECK(after.f1() >= before.f1());
}

TEST_CASE("per-lexelt and per-genre tables aggregate the same counts") {
    std::vector<Instance> gold = toy_gold(4);
    gold[0].genre = "bn";
    gold[1].genre = "bn";
    gold[2].genre = "mz";
    gold[1].lexelt.lemma = "v";
    EvalReport report = score(answers_for(gold, 3, 1), gold);
    CHECK(report.per_lexelt.at("w").total == 3);
    CHECK(report.per_lexelt.at("v").total == 1);
    CHECK(report.per_genre.at("bn").total == 2);
    CHECK(report.per_genre.at("mz").total == 1);
    std::uint64_t lexelt_sum = 0;
    for (const auto& [key, counts] : report.per_lexelt) lexelt_sum += counts.total;
    CHECK(lexelt_sum == report.overall.total);
}

TEST_CASE("answer files round-trip") {
    namespace fs = ::std::filesystem;
    fs::path dir = fs::temp_directory_path() / "sensekit_eval_tests";
    fs::create_directories(dir);
    std::string path = (dir / "answers.tsv").string();
    AnswerSet answers;
    answers.answer("id.1", "sense%1");
    answers.answer("id.2", "sense%2");
    answers.save(path);
    AnswerSet loaded = AnswerSet::load(path);
    CHECK(loaded.by_id == answers.by_id);
}

TEST_CASE("identical systems are degenerate and never significant") {
    auto gold = toy_gold(30);
    AnswerSet answers = answers_for(gold, 17, 13);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SignificanceResult result =
            bootstrap_significance(answers, answers, gold, 2000, seed);
        CHECK_FALSE(result.significant);
        CHECK(result.p_value >= 0.05);
        CHECK(result.better.empty());
        CHECK(result.p_value == doctest::Approx(1.0));
    }
}

TEST_CASE("total dominance gives p = 0") {
    auto gold = toy_gold(100);
    AnswerSet all_wrong = answers_for(gold, 0, 100);
    AnswerSet all_right = answers_for(gold, 100, 0);
    SignificanceResult result =
        bootstrap_significance(all_wrong, all_right, gold, 3000, 99);
    CHECK(result.p_value == doctest::Approx(0.0));
    CHECK(result.significant);
    CHECK(result.better == "B");
    CHECK(result.observed_diff == doctest::Approx(100.0));
}

TEST_CASE("bootstrap is deterministic under its seed") {
    auto gold = toy_gold(25);
    AnswerSet a = answers_for(gold, 12, 13);
    AnswerSet b = answers_for(gold, 15, 10);
    SignificanceResult first = bootstrap_significance(a, b, gold, 500, 7);
    SignificanceResult second = bootstrap_significance(a, b, gold, 500, 7);
    CHECK(first.p_value == second.p_value);
}

TEST_CASE("crafted 20-instance case matches an independent high-resample oracle") {
    // B answers 11 correctly, A answers 10; they overlap on 9.
    auto gold = toy_gold(20);
    AnswerSet a, b;
    for (std::size_t i = 0; i < 20; ++i) {
        a.answer(gold[i].id, i < 10 ? "good" : "bad");
        b.answer(gold[i].id, (i >= 1 && i < 12) ? "good" : "bad");
    }
    SignificanceResult result = bootstrap_significance(a, b, gold, 10000, 123);

    // Oracle: fresh implementation with its own generator at 10^5 resamples.
    Rng rng(998877);
    std::size_t non_positive = 0;
    const std::size_t oracle_resamples = 100000;
    for (std::size_t r = 0; r < oracle_resamples; ++r) {
        int correct_a = 0, correct_b = 0;
        for (int i = 0; i < 20; ++i) {
            std::size_t pick = rng.below(20);
            if (pick < 10) ++correct_a;
            if (pick >= 1 && pick < 12) ++correct_b;
        }
        if (correct_b <= correct_a) ++non_positive;
    }
    double oracle_p = static_cast<double>(non_positive) / oracle_resamples;
    CHECK(result.p_value == doctest::Approx(oracle_p).epsilon(0.2));
    CHECK(std::abs(result.p_value - oracle_p) <= 0.02);
}

TEST_CASE("experiment runs are averaged arithmetically and knn is run-stable") {
    SyntheticSpec spec;
    spec.num_types = 4;
    spec.per_type = 16;
    spec.seed = 77;
    spec.d_model = 16;
    auto data = make_synthetic(spec);

    ExperimentConfig config;
    config.variant = HeadVariant::knn;
    config.seeds = {1, 2, 3};
    ExperimentResult knn_result =
        run_experiment(data.train, {}, data.test, data.lookup(), data.inventory,
                       config);
    REQUIRE(knn_result.per_run.size() == 3);
    CHECK(knn_result.per_run[0].f1() == knn_result.per_run[1].f1());
    CHECK(knn_result.per_run[1].f1() == knn_result.per_run[2].f1());
    double mean = (knn_result.per_run[0].f1() + knn_result.per_run[1].f1() +
                   knn_result.per_run[2].f1()) /
                  3.0;
    CHECK(knn_result.mean_f1 == doctest::Approx(mean));

    config.variant = HeadVariant::simple;
    config.train.max_epochs = 25;
    ExperimentResult simple_result =
        run_experiment(data.train, data.test, data.test, data.lookup(),
                       data.inventory, config);
    AnswerSet mfs = mfs_answers(data.test, data.inventory);
    EvalReport mfs_report = score(mfs, data.test);
    CHECK(simple_result.mean_accuracy >= mfs_report.accuracy());
}
