#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "sensekit/corpus.hpp"
#include "sensekit/eval.hpp"
#include "synthetic.hpp"

using namespace sensekit;
namespace fs = std::filesystem;

namespace {

// The commands narrate to stdout/stderr; keep test output readable.
struct CaptureStreams {
    std::stringstream out, err;
    std::streambuf* old_out;
    std::streambuf* old_err;
    CaptureStreams()
        : old_out(std::cout.rdbuf(out.rdbuf())), old_err(std::cerr.rdbuf(err.rdbuf())) {}
    ~CaptureStreams() {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
    }
};

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "sensekit_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string fixture(const std::string& name) {
    return std::string(SENSEKIT_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::trunc);
    REQUIRE(file);
    file << text;
}

} // namespace

TEST_CASE("convert turns the senseval fixture into known native records") {
    CaptureStreams capture;
    std::string out = (work_dir() / "senseval_native.jsonl").string();
    cli::ConvertOptions options;
    options.format = "senseval-ls";
    options.input = fixture("senseval_ls.xml");
    options.output = out;
    CHECK(cli::cmd_convert(options) == cli::kOk);

    Corpus corpus = load_corpus(out);
    REQUIRE(corpus.instances.size() == 3);
    CHECK(corpus.instances[0].id == "bank.n.1");
    CHECK(corpus.instances[0].target_index == 4);
    CHECK(corpus.inventory.num_lexelts() == 2);
    CHECK(fs::exists(out + ".run.json"));

    // Conversion is deterministic byte-for-byte.
    std::string again = (work_dir() / "senseval_native2.jsonl").string();
    options.output = again;
    CHECK(cli::cmd_convert(options) == cli::kOk);
    CHECK(slurp(out) == slurp(again));
}

TEST_CASE("convert reports malformed xml with a nonzero exit") {
    CaptureStreams capture;
    std::string bad = (work_dir() / "bad.xml").string();
    write_file(bad, "<corpus>\n<lexelt item=\"x.n\">\n<instance\n");
    cli::ConvertOptions options;
    options.format = "senseval-ls";
    options.input = bad;
    options.output = (work_dir() / "bad_native.jsonl").string();
    CHECK(cli::cmd_convert(options) == cli::kInputError);
    CHECK(capture.err.str().find("bad.xml") != std::string::npos);
}

TEST_CASE("convert on empty input warns and writes an empty corpus") {
    CaptureStreams capture;
    std::string empty = (work_dir() / "empty.xml").string();
    write_file(empty, "<corpus lang=\"english\">\n</corpus>\n");
    cli::ConvertOptions options;
    options.format = "senseval-ls";
    options.input = empty;
    options.output = (work_dir() / "empty_native.jsonl").string();
    CHECK(cli::cmd_convert(options) == cli::kOk);
    CHECK(capture.err.str().find("warning") != std::string::npos);
    CHECK(load_corpus(options.output).instances.empty());
}

TEST_CASE("unknown format is an input error") {
    CaptureStreams capture;
    cli::ConvertOptions options;
    options.format = "nonsense";
    options.input = fixture("senseval_ls.xml");
    options.output = (work_dir() / "x.jsonl").string();
    CHECK(cli::cmd_convert(options) == cli::kInputError);
}

namespace {

struct PipelineSetup {
    fs::path dir;
    std::string train_path, test_path, vocab_path, weights_path, cache_path;
};

PipelineSetup prepare_pipeline(const std::string& tag) {
    PipelineSetup setup;
    setup.dir = work_dir() / tag;
    fs::create_directories(setup.dir);

    testing::SyntheticSpec spec;
    spec.num_types = 8;
    spec.per_type = 30;
    spec.seed = 5;
    spec.d_model = 16;
    auto data = testing::make_synthetic(spec);

    setup.train_path = (setup.dir / "train.jsonl").string();
    setup.test_path = (setup.dir / "test.jsonl").string();
    save_corpus(data.train, setup.train_path);
    save_corpus(data.test, setup.test_path);

    setup.vocab_path = (setup.dir / "vocab.txt").string();
    setup.weights_path = (setup.dir / "weights.nts").string();
    setup.cache_path = (setup.dir / "cache").string();

    cli::BuildVocabOptions vocab_opts;
    vocab_opts.corpora = {setup.train_path, setup.test_path};
    vocab_opts.output = setup.vocab_path;
    REQUIRE(cli::cmd_build_vocab(vocab_opts) == cli::kOk);

    cli::InitWeightsOptions init_opts;
    init_opts.vocab = setup.vocab_path;
    init_opts.layers = 2;
    init_opts.heads = 2;
    init_opts.d_model = 16;
    init_opts.d_k = 8;
    init_opts.d_v = 8;
    init_opts.d_ff = 32;
    init_opts.max_positions = 16;
    init_opts.seed = 11;
    init_opts.output = setup.weights_path;
    REQUIRE(cli::cmd_init_weights(init_opts) == cli::kOk);

    cli::EncodeOptions encode_opts;
    encode_opts.corpus = setup.train_path;
    encode_opts.weights = setup.weights_path;
    encode_opts.vocab = setup.vocab_path;
    encode_opts.cache_dir = setup.cache_path;
    REQUIRE(cli::cmd_encode(encode_opts) == cli::kOk);
    encode_opts.corpus = setup.test_path;
    REQUIRE(cli::cmd_encode(encode_opts) == cli::kOk);
    return setup;
}

} // namespace

TEST_CASE("the full pipeline learns the synthetic task end to end") {
    CaptureStreams capture;
    PipelineSetup setup = prepare_pipeline("e2e");

    cli::TrainOptions train_opts;
    train_opts.train_corpus = setup.train_path;
    train_opts.cache_dir = setup.cache_path;
    train_opts.variant = "simple";
    train_opts.epochs = 50;
    train_opts.epoch_transfer = true; // lexical-sample protocol
    train_opts.output = (setup.dir / "simple.ckpt").string();
    REQUIRE(cli::cmd_train(train_opts) == cli::kOk);

    cli::PredictOptions predict_opts;
    predict_opts.test_corpus = setup.test_path;
    predict_opts.cache_dir = setup.cache_path;
    predict_opts.model = train_opts.output;
    predict_opts.output = (setup.dir / "answers.tsv").string();
    REQUIRE(cli::cmd_predict(predict_opts) == cli::kOk);

    cli::EvalOptions eval_opts;
    eval_opts.answers = predict_opts.output;
    eval_opts.gold = setup.test_path;
    eval_opts.report_json = (setup.dir / "report.json").string();
    REQUIRE(cli::cmd_eval(eval_opts) == cli::kOk);

    AnswerSet answers = AnswerSet::load(predict_opts.output);
    Corpus gold = load_corpus(setup.test_path);
    EvalReport report = score(answers, gold.instances);
    CHECK(report.accuracy() >= 95.0);
    CHECK(fs::exists(eval_opts.report_json));
}

TEST_CASE("knn prediction needs no training run") {
    CaptureStreams capture;
    PipelineSetup setup = prepare_pipeline("knn");

    cli::TrainOptions train_opts; // builds the index; no epochs involved
    train_opts.train_corpus = setup.train_path;
    train_opts.cache_dir = setup.cache_path;
    train_opts.variant = "1nn";
    train_opts.output = (setup.dir / "knn.ckpt").string();
    REQUIRE(cli::cmd_train(train_opts) == cli::kOk);

    cli::PredictOptions predict_opts;
    predict_opts.test_corpus = setup.test_path;
    predict_opts.cache_dir = setup.cache_path;
    predict_opts.model = train_opts.output;
    predict_opts.output = (setup.dir / "knn_answers.tsv").string();
    REQUIRE(cli::cmd_predict(predict_opts) == cli::kOk);
    AnswerSet answers = AnswerSet::load(predict_opts.output);
    Corpus gold = load_corpus(setup.test_path);
    CHECK(answers.by_id.size() == gold.instances.size());
}

TEST_CASE("encode reruns are no-ops and context changes invalidate the cache") {
    CaptureStreams capture;
    PipelineSetup setup = prepare_pipeline("cache");

    Corpus train = load_corpus(setup.train_path);
    fs::path entry = fs::path(setup.cache_path) /
                     cache_entry_filename(train.instances.front().id);
    REQUIRE(fs::exists(entry));
    auto stamp_before = fs::last_write_time(entry);
    std::string manifest_before = slurp((fs::path(setup.cache_path) / "manifest.json").string());

    cli::EncodeOptions encode_opts;
    encode_opts.corpus = setup.train_path;
    encode_opts.weights = setup.weights_path;
    encode_opts.vocab = setup.vocab_path;
    encode_opts.cache_dir = setup.cache_path;
    REQUIRE(cli::cmd_encode(encode_opts) == cli::kOk); // same hashes: no-op
    CHECK(fs::last_write_time(entry) == stamp_before);

    encode_opts.context = "1sent+1sur";
    REQUIRE(cli::cmd_encode(encode_opts) == cli::kOk); // stale cache is rebuilt
    CHECK(fs::last_write_time(entry) != stamp_before);
    std::string manifest_after = slurp((fs::path(setup.cache_path) / "manifest.json").string());
    CHECK(manifest_before != manifest_after);

    // The attention-scale switch is part of the cache identity too.
    auto stamp_sur = fs::last_write_time(entry);
    encode_opts.scale_by_dk = true;
    REQUIRE(cli::cmd_encode(encode_opts) == cli::kOk);
    CHECK(fs::last_write_time(entry) != stamp_sur);
}

TEST_CASE("predict refuses a cache built under a different context mode") {
    CaptureStreams capture;
    PipelineSetup setup = prepare_pipeline("mismatch");

    cli::TrainOptions train_opts;
    train_opts.train_corpus = setup.train_path;
    train_opts.cache_dir = setup.cache_path;
    train_opts.variant = "simple";
    train_opts.epochs = 2;
    train_opts.output = (setup.dir / "model.ckpt").string();
    REQUIRE(cli::cmd_train(train_opts) == cli::kOk);

    cli::EncodeOptions encode_opts;
    encode_opts.corpus = setup.test_path;
    encode_opts.weights = setup.weights_path;
    encode_opts.vocab = setup.vocab_path;
    encode_opts.cache_dir = setup.cache_path;
    encode_opts.context = "1sent+1sur";
    REQUIRE(cli::cmd_encode(encode_opts) == cli::kOk);

    cli::PredictOptions predict_opts;
    predict_opts.test_corpus = setup.test_path;
    predict_opts.cache_dir = setup.cache_path;
    predict_opts.model = train_opts.output;
    predict_opts.output = (setup.dir / "never.tsv").string();
    CHECK(cli::cmd_predict(predict_opts) == cli::kConfigMismatch);
}

TEST_CASE("identical answer files are reported as not significant") {
    CaptureStreams capture;
    fs::path dir = work_dir() / "sig";
    fs::create_directories(dir);

    std::vector<Instance> gold;
    AnswerSet answers;
    for (int i = 0; i < 12; ++i) {
        Instance inst;
        inst.id = "g" + std::to_string(i);
        inst.words = {"w"};
        inst.target_index = 0;
        inst.lexelt.lemma = "w";
        inst.gold_senses = {"s"};
        gold.push_back(inst);
        answers.answer(inst.id, i % 2 ? "s" : "t");
    }
    std::string gold_path = (dir / "gold.jsonl").string();
    std::string answers_path = (dir / "answers.tsv").string();
    save_corpus(gold, gold_path);
    answers.save(answers_path);

    cli::SignificanceOptions options;
    options.answers_a = answers_path;
    options.answers_b = answers_path;
    options.gold = gold_path;
    options.resamples = 500;
    CHECK(cli::cmd_significance(options) == cli::kOk);
    CHECK(capture.out.str().find("not significant") != std::string::npos);
}

TEST_CASE("eval propagates input errors as exit code 2") {
    CaptureStreams capture;
    fs::path dir = work_dir() / "eval_err";
    fs::create_directories(dir);
    std::string gold_path = (dir / "gold.jsonl").string();
    std::string answers_path = (dir / "answers.tsv").string();
    Instance inst;
    inst.id = "only";
    inst.words = {"w"};
    inst.target_index = 0;
    inst.lexelt.lemma = "w";
    inst.gold_senses = {"s"};
    save_corpus({inst}, gold_path);
    AnswerSet answers;
    answers.answer("unknown-id", "s");
    answers.save(answers_path);

    cli::EvalOptions options;
    options.answers = answers_path;
    options.gold = gold_path;
    CHECK(cli::cmd_eval(options) == cli::kInputError);
}

TEST_CASE("experiment command averages seeds and writes a report") {
    CaptureStreams capture;
    PipelineSetup setup = prepare_pipeline("experiment");

    cli::ExperimentOptions options;
    options.train_corpus = setup.train_path;
    options.test_corpus = setup.test_path;
    options.cache_dir = setup.cache_path;
    options.variant = "1nn";
    options.runs = 3;
    options.report_json = (setup.dir / "experiment.json").string();
    CHECK(cli::cmd_experiment(options) == cli::kOk);
    CHECK(fs::exists(options.report_json));
    CHECK(capture.out.str().find("mean F1") != std::string::npos);
}
