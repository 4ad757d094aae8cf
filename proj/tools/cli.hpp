#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sensekit::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;      // unexpected error
inline constexpr int kInputError = 2;   // malformed or missing input
inline constexpr int kNumericError = 3; // NaN/Inf surfaced
inline constexpr int kConfigMismatch = 4;

struct ConvertOptions {
    std::string format; // "senseval-ls" or "allwords-xml"
    std::string input;
    std::string keys; // allwords-xml only
    std::string output;
};

struct BuildVocabOptions {
    std::vector<std::string> corpora;
    std::string output;
    bool lowercase = true;
};

struct InitWeightsOptions {
    std::string vocab;
    bool lowercase = true;
    std::size_t layers = 2;
    std::size_t heads = 2;
    std::size_t d_model = 32;
    std::size_t d_k = 16;
    std::size_t d_v = 16;
    std::size_t d_ff = 64;
    std::size_t max_positions = 128;
    std::uint64_t seed = 1;
    std::string output;
};

struct EncodeOptions {
    std::string corpus;
    std::string weights;
    std::string vocab;
    bool lowercase = true;
    std::string context = "1sent";
    bool scale_by_dk = false;
    std::string cache_dir;
};

struct TrainOptions {
    std::string train_corpus;
    std::string dev_corpus; // optional
    std::string cache_dir;
    std::string variant = "simple";
    std::uint64_t seed = 1;
    std::size_t epochs = 50;
    double learning_rate = 1e-3;
    std::size_t batch_size = 16;
    std::size_t eval_every = 0;
    bool epoch_transfer = false;
    double dev_ratio = 0.2;
    std::string output; // checkpoint path
};

struct PredictOptions {
    std::string test_corpus;
    std::string cache_dir;
    std::string model;
    bool backoff = true;
    std::string output; // answer file
};

struct EvalOptions {
    std::string answers;
    std::string gold;
    std::string report_json; // optional
};

struct SignificanceOptions {
    std::string answers_a;
    std::string answers_b;
    std::string gold;
    std::size_t resamples = 10000;
    std::uint64_t seed = 1;
    std::string name_a = "A";
    std::string name_b = "B";
};

struct ExperimentOptions {
    std::string train_corpus;
    std::string dev_corpus; // optional
    std::string test_corpus;
    std::string cache_dir;
    std::string variant = "simple";
    std::uint64_t seed = 1;
    std::size_t runs = 3;
    std::size_t epochs = 50;
    double learning_rate = 1e-3;
    std::size_t batch_size = 16;
    bool epoch_transfer = false;
    double dev_ratio = 0.2;
    std::string report_json; // optional
};

int cmd_convert(const ConvertOptions& options);
int cmd_build_vocab(const BuildVocabOptions& options);
int cmd_init_weights(const InitWeightsOptions& options);
int cmd_encode(const EncodeOptions& options);
int cmd_train(const TrainOptions& options);
int cmd_predict(const PredictOptions& options);
int cmd_eval(const EvalOptions& options);
int cmd_significance(const SignificanceOptions& options);
int cmd_experiment(const ExperimentOptions& options);

} // namespace sensekit::cli
