#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"word sense disambiguation with contextual encoder representations"};
    app.require_subcommand(1);

    sensekit::cli::ConvertOptions convert_opts;
    auto* convert = app.add_subcommand("convert", "convert a benchmark corpus to native records");
    convert->add_option("--format", convert_opts.format, "senseval-ls | allwords-xml")
        ->required();
    convert->add_option("--input", convert_opts.input, "benchmark file")->required();
    convert->add_option("--keys", convert_opts.keys, "gold key file (allwords-xml)");
    convert->add_option("--output", convert_opts.output, "native corpus file")->required();

    sensekit::cli::BuildVocabOptions vocab_opts;
    auto* build_vocab = app.add_subcommand("build-vocab", "collect a word-level vocabulary");
    build_vocab->add_option("--corpus", vocab_opts.corpora, "native corpus file(s)")
        ->required();
    build_vocab->add_option("--output", vocab_opts.output, "vocabulary file")->required();
    build_vocab->add_flag("!--no-lowercase", vocab_opts.lowercase, "keep case (e.g. Chinese)");

    sensekit::cli::InitWeightsOptions init_opts;
    auto* init_weights = app.add_subcommand("init-weights", "write random toy encoder weights");
    init_weights->add_option("--vocab", init_opts.vocab, "vocabulary file")->required();
    init_weights->add_flag("!--no-lowercase", init_opts.lowercase, "keep case");
    init_weights->add_option("--layers", init_opts.layers, "encoder layers");
    init_weights->add_option("--heads", init_opts.heads, "attention heads");
    init_weights->add_option("--d-model", init_opts.d_model, "hidden width");
    init_weights->add_option("--d-k", init_opts.d_k, "key/query width");
    init_weights->add_option("--d-v", init_opts.d_v, "value width");
    init_weights->add_option("--d-ff", init_opts.d_ff, "feed-forward width");
    init_weights->add_option("--max-positions", init_opts.max_positions, "position budget");
    init_weights->add_option("--seed", init_opts.seed, "rng seed");
    init_weights->add_option("--output", init_opts.output, "weight container")->required();

    sensekit::cli::EncodeOptions encode_opts;
    auto* encode = app.add_subcommand("encode", "precompute hidden stacks into a cache");
    encode->add_option("--corpus", encode_opts.corpus, "native corpus file")->required();
    encode->add_option("--weights", encode_opts.weights, "encoder weight container")->required();
    encode->add_option("--vocab", encode_opts.vocab, "vocabulary file")->required();
    encode->add_flag("!--no-lowercase", encode_opts.lowercase, "keep case");
    encode->add_option("--context", encode_opts.context, "1sent | 1sent+1sur")
        ->check(CLI::IsMember({"1sent", "1sent+1sur"}));
    encode->add_flag("--scale-dk", encode_opts.scale_by_dk,
                     "scale attention by 1/sqrt(d_k) instead of 1/sqrt(d_v)");
    encode->add_option("--cache", encode_opts.cache_dir, "cache directory")->required();

    sensekit::cli::TrainOptions train_opts;
    auto* train = app.add_subcommand("train", "train a disambiguation head");
    train->add_option("--train", train_opts.train_corpus, "training corpus")->required();
    train->add_option("--dev", train_opts.dev_corpus, "development corpus");
    train->add_option("--cache", train_opts.cache_dir, "hidden-stack cache")->required();
    train->add_option("--variant", train_opts.variant, "1nn | simple | lw | glu | glu-lw")
        ->check(CLI::IsMember({"1nn", "simple", "lw", "glu", "glu-lw"}));
    train->add_option("--seed", train_opts.seed, "rng seed");
    train->add_option("--epochs", train_opts.epochs, "epoch budget");
    train->add_option("--lr", train_opts.learning_rate, "Adam learning rate");
    train->add_option("--batch", train_opts.batch_size, "sentences per update");
    train->add_option("--eval-every", train_opts.eval_every,
                      "dev evaluations every N updates (0: each epoch)");
    train->add_flag("--epoch-transfer", train_opts.epoch_transfer,
                    "80/20 split to pick the epoch count, then retrain on all data");
    train->add_option("--dev-ratio", train_opts.dev_ratio, "dev fraction per word type");
    train->add_option("--output", train_opts.output, "checkpoint path")->required();

    sensekit::cli::PredictOptions predict_opts;
    auto* predict = app.add_subcommand("predict", "predict senses for a corpus");
    predict->add_option("--test", predict_opts.test_corpus, "test corpus")->required();
    predict->add_option("--cache", predict_opts.cache_dir, "hidden-stack cache")->required();
    predict->add_option("--model", predict_opts.model, "checkpoint path")->required();
    predict->add_flag("!--no-backoff", predict_opts.backoff,
                      "abstain instead of most-frequent-sense backoff");
    predict->add_option("--output", predict_opts.output, "answer file")->required();

    sensekit::cli::EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "score an answer file");
    eval->add_option("--answers", eval_opts.answers, "answer file")->required();
    eval->add_option("--gold", eval_opts.gold, "gold corpus")->required();
    eval->add_option("--report", eval_opts.report_json, "write a JSON report");

    sensekit::cli::SignificanceOptions sig_opts;
    auto* significance = app.add_subcommand("significance", "bootstrap comparison of two systems");
    significance->add_option("--answers-a", sig_opts.answers_a, "answer file A")->required();
    significance->add_option("--answers-b", sig_opts.answers_b, "answer file B")->required();
    significance->add_option("--gold", sig_opts.gold, "gold corpus")->required();
    significance->add_option("--resamples", sig_opts.resamples, "bootstrap resamples");
    significance->add_option("--seed", sig_opts.seed, "rng seed");
    significance->add_option("--name-a", sig_opts.name_a, "label for system A");
    significance->add_option("--name-b", sig_opts.name_b, "label for system B");

    sensekit::cli::ExperimentOptions exp_opts;
    auto* experiment = app.add_subcommand("experiment", "train/evaluate over several seeds");
    experiment->add_option("--train", exp_opts.train_corpus, "training corpus")->required();
    experiment->add_option("--dev", exp_opts.dev_corpus, "development corpus");
    experiment->add_option("--test", exp_opts.test_corpus, "test corpus")->required();
    experiment->add_option("--cache", exp_opts.cache_dir, "hidden-stack cache")->required();
    experiment->add_option("--variant", exp_opts.variant, "1nn | simple | lw | glu | glu-lw")
        ->check(CLI::IsMember({"1nn", "simple", "lw", "glu", "glu-lw"}));
    experiment->add_option("--seed", exp_opts.seed, "base seed; run r uses seed+r");
    experiment->add_option("--runs", exp_opts.runs, "number of runs");
    experiment->add_option("--epochs", exp_opts.epochs, "epoch budget");
    experiment->add_option("--lr", exp_opts.learning_rate, "Adam learning rate");
    experiment->add_option("--batch", exp_opts.batch_size, "sentences per update");
    experiment->add_flag("--epoch-transfer", exp_opts.epoch_transfer,
                         "lexical-sample protocol when no dev corpus is given");
    experiment->add_option("--dev-ratio", exp_opts.dev_ratio, "dev fraction per word type");
    experiment->add_option("--report", exp_opts.report_json, "write a JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : sensekit::cli::kInputError;
    }

    if (convert->parsed()) return sensekit::cli::cmd_convert(convert_opts);
    if (build_vocab->parsed()) return sensekit::cli::cmd_build_vocab(vocab_opts);
    if (init_weights->parsed()) return sensekit::cli::cmd_init_weights(init_opts);
    if (encode->parsed()) return sensekit::cli::cmd_encode(encode_opts);
    if (train->parsed()) return sensekit::cli::cmd_train(train_opts);
    if (predict->parsed()) return sensekit::cli::cmd_predict(predict_opts);
    if (eval->parsed()) return sensekit::cli::cmd_eval(eval_opts);
    if (significance->parsed()) return sensekit::cli::cmd_significance(sig_opts);
    if (experiment->parsed()) return sensekit::cli::cmd_experiment(exp_opts);
    return sensekit::cli::kInputError;
}
