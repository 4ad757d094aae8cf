#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sensekit/cache.hpp"
#include "sensekit/convert.hpp"
#include "sensekit/corpus.hpp"
#include "sensekit/encoder.hpp"
#include "sensekit/errors.hpp"
#include "sensekit/eval.hpp"
#include "sensekit/hashing.hpp"
#include "sensekit/heads.hpp"
#include "sensekit/tokenizer.hpp"
#include "sensekit/trainer.hpp"

namespace sensekit::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

// Every command records what it ran with: the identity block (flags plus
// input hashes) pins the run, the meta block carries timestamps.
void write_run_manifest(const std::string& primary_output, const std::string& command,
                        const ordered_json& config,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs) {
    ordered_json manifest;
    ordered_json identity;
    identity["command"] = command;
    identity["config"] = config;
    ordered_json hashes = ordered_json::object();
    for (const std::string& path : inputs) {
        hashes[path] = hex64(hash_file(path));
    }
    identity["input_hashes"] = std::move(hashes);
    manifest["identity"] = std::move(identity);
    manifest["outputs"] = outputs;
    auto now = std::chrono::system_clock::now().time_since_epoch();
    manifest["meta"] = {
        {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};

    std::ofstream file(primary_output + ".run.json", std::ios::trunc);
    if (!file) {
        throw InputError("cannot write run manifest for '" + primary_output + "'");
    }
    file << manifest.dump(2) << "\n";
}

int guarded(const char* command, const std::function<void()>& body) {
    try {
        body();
        return kOk;
    } catch (const ConfigMismatchError& e) {
        std::cerr << command << ": config mismatch: " << e.what() << "\n";
        return kConfigMismatch;
    } catch (const NumericError& e) {
        std::cerr << command << ": numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const InputError& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return kFailure;
    }
}

TrainConfig train_config_from(std::uint64_t seed, std::size_t epochs, double lr,
                              std::size_t batch, std::size_t eval_every = 0) {
    TrainConfig config;
    config.seed = seed;
    config.max_epochs = epochs;
    config.learning_rate = lr;
    config.batch_size = batch;
    config.eval_every_updates = eval_every;
    return config;
}

} // namespace

int cmd_convert(const ConvertOptions& options) {
    return guarded("convert", [&] {
        std::vector<Instance> instances;
        if (options.format == "senseval-ls") {
            instances = convert_senseval_lexical_sample(read_file(options.input),
                                                        options.input);
        } else if (options.format == "allwords-xml") {
            if (options.keys.empty()) {
                throw InputError("allwords-xml conversion needs --keys");
            }
            instances = convert_unified_all_words(read_file(options.input),
                                                  read_file(options.keys),
                                                  options.input);
        } else {
            throw InputError("unknown corpus format '" + options.format + "'");
        }
        if (instances.empty()) {
            std::cerr << "convert: warning: no instances found in '" << options.input
                      << "'\n";
        }
        save_corpus(instances, options.output);

        std::vector<std::string> inputs = {options.input};
        if (!options.keys.empty()) inputs.push_back(options.keys);
        write_run_manifest(options.output, "convert",
                           {{"format", options.format}}, inputs, {options.output});
        std::cout << "wrote " << instances.size() << " records to " << options.output
                  << "\n";
    });
}

int cmd_build_vocab(const BuildVocabOptions& options) {
    return guarded("build-vocab", [&] {
        if (options.corpora.empty()) throw InputError("no corpus files given");
        std::set<std::string> words;
        auto add_sentence = [&](const std::vector<std::string>& sentence) {
            for (const std::string& word : sentence) {
                std::string w = word;
                if (options.lowercase) {
                    for (char& c : w) {
                        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
                    }
                }
                words.insert(w);
            }
        };
        for (const std::string& path : options.corpora) {
            Corpus corpus = load_corpus(path);
            for (const Instance& inst : corpus.instances) {
                add_sentence(inst.words);
                if (inst.left_neighbor) add_sentence(*inst.left_neighbor);
                if (inst.right_neighbor) add_sentence(*inst.right_neighbor);
            }
        }
        std::vector<std::string> pieces = {kUnknownPiece, kClsPiece, kSepPiece};
        pieces.insert(pieces.end(), words.begin(), words.end());
        Vocabulary vocab = Vocabulary::from_pieces(pieces, options.lowercase);
        vocab.save(options.output);
        write_run_manifest(options.output, "build-vocab",
                           {{"lowercase", options.lowercase}}, options.corpora,
                           {options.output});
        std::cout << "wrote " << pieces.size() << " pieces to " << options.output
                  << "\n";
    });
}

int cmd_init_weights(const InitWeightsOptions& options) {
    return guarded("init-weights", [&] {
        Vocabulary vocab = Vocabulary::load(options.vocab, options.lowercase);
        EncoderConfig config;
        config.layers = options.layers;
        config.heads = options.heads;
        config.d_model = options.d_model;
        config.d_k = options.d_k;
        config.d_v = options.d_v;
        config.d_ff = options.d_ff;
        config.max_positions = options.max_positions;
        config.vocab_size = vocab.size();
        config.validate();
        EncoderWeights weights = EncoderWeights::random(config, options.seed);
        weights.to_store().save(options.output);
        write_run_manifest(options.output, "init-weights",
                           {{"layers", options.layers},
                            {"heads", options.heads},
                            {"d_model", options.d_model},
                            {"d_k", options.d_k},
                            {"d_v", options.d_v},
                            {"d_ff", options.d_ff},
                            {"max_positions", options.max_positions},
                            {"seed", options.seed}},
                           {options.vocab}, {options.output});
        std::cout << "wrote encoder weights to " << options.output << "\n";
    });
}

int cmd_encode(const EncodeOptions& options) {
    return guarded("encode", [&] {
        Corpus corpus = load_corpus(options.corpus);
        Vocabulary vocab = Vocabulary::load(options.vocab, options.lowercase);
        NamedTensorStore store = NamedTensorStore::load(options.weights);
        EncoderConfig config = EncoderConfig::infer(store);
        if (options.scale_by_dk) config.scale = AttnScale::inv_sqrt_dk;
        EncoderWeights weights = EncoderWeights::from_store(store, config);
        ContextMode mode = context_mode_from_string(options.context);

        CacheManifest manifest;
        // The attention scale changes the encoder function, so it is part of
        // the cache identity alongside the weight bytes.
        manifest.encoder_hash =
            hex64(weights.content_hash()) + (options.scale_by_dk ? "+dk" : "");
        manifest.context_mode = options.context;
        manifest.vocab_hash = hex64(vocab.hash());
        manifest.num_layers = config.layers;
        manifest.d_model = config.d_model;

        bool reuse = false;
        HiddenCache cache = [&] {
            try {
                HiddenCache existing = HiddenCache::open(options.cache_dir);
                const CacheManifest& m = existing.manifest();
                reuse = m.encoder_hash == manifest.encoder_hash &&
                        m.context_mode == manifest.context_mode &&
                        m.vocab_hash == manifest.vocab_hash;
            } catch (const InputError&) {
                // no cache yet
            }
            if (reuse) return HiddenCache::open(options.cache_dir);
            return HiddenCache::create(options.cache_dir, manifest);
        }();

        std::size_t encoded = 0;
        std::size_t skipped = 0;
        for (const Instance& inst : corpus.instances) {
            if (reuse && cache.contains(inst.id)) {
                ++skipped;
                continue;
            }
            cache.put(inst.id, encode_instance(inst, mode, vocab, weights, config));
            ++encoded;
        }
        cache.write_manifest();
        write_run_manifest(options.cache_dir + "/cache", "encode",
                           {{"context", options.context},
                            {"scale_by_dk", options.scale_by_dk},
                            {"lowercase", options.lowercase}},
                           {options.corpus, options.weights, options.vocab},
                           {options.cache_dir});
        std::cout << "encoded " << encoded << " instances (" << skipped
                  << " already cached) into " << options.cache_dir << "\n";
    });
}

int cmd_train(const TrainOptions& options) {
    return guarded("train", [&] {
        Corpus train_corpus = load_corpus(options.train_corpus);
        HiddenCache cache = HiddenCache::open(options.cache_dir);
        HiddenLookup lookup = lookup_from_cache(cache);
        HeadVariant variant = head_variant_from_string(options.variant);

        HeadModel model;
        if (variant == HeadVariant::knn) {
            std::vector<HiddenStack> storage;
            storage.reserve(train_corpus.instances.size());
            std::vector<const HiddenStack*> stacks;
            for (const Instance& inst : train_corpus.instances) {
                storage.push_back(lookup(inst.id));
            }
            for (const HiddenStack& s : storage) stacks.push_back(&s);
            model = init_head_model(HeadVariant::knn, train_corpus.inventory,
                                    cache.manifest().d_model,
                                    cache.manifest().num_layers, options.seed);
            model.knn = build_knn_index(train_corpus.instances, stacks);
        } else {
            TrainConfig config =
                train_config_from(options.seed, options.epochs, options.learning_rate,
                                  options.batch_size, options.eval_every);
            if (options.epoch_transfer) {
                EpochTransferResult result = train_with_epoch_transfer(
                    train_corpus.instances, options.dev_ratio, lookup,
                    train_corpus.inventory, variant, config);
                std::cout << "phase 1 best epoch: " << result.phase1_best_epoch
                          << " (dev " << result.phase1_dev_score << ")"
                          << ", phase 2 ran " << result.phase2_epochs_run
                          << " epochs\n";
                model = std::move(result.result.model);
            } else if (!options.dev_corpus.empty()) {
                Corpus dev = load_corpus(options.dev_corpus);
                TrainResult result = train(train_corpus.instances, dev.instances,
                                           lookup, train_corpus.inventory, variant,
                                           config);
                std::cout << "best dev score " << result.dev_score << " at update "
                          << result.best_update << " (epoch " << result.best_epoch
                          << ")\n";
                model = std::move(result.model);
            } else {
                TrainResult result = train(train_corpus.instances, {}, lookup,
                                           train_corpus.inventory, variant, config);
                model = std::move(result.model);
            }
        }
        model.encoder_hash = cache.manifest().encoder_hash;
        model.context_mode = cache.manifest().context_mode;
        save_head_model(model, options.output);

        std::vector<std::string> inputs = {options.train_corpus};
        if (!options.dev_corpus.empty()) inputs.push_back(options.dev_corpus);
        write_run_manifest(options.output, "train",
                           {{"variant", options.variant},
                            {"seed", options.seed},
                            {"epochs", options.epochs},
                            {"learning_rate", options.learning_rate},
                            {"batch_size", options.batch_size},
                            {"eval_every", options.eval_every},
                            {"epoch_transfer", options.epoch_transfer},
                            {"dev_ratio", options.dev_ratio},
                            {"cache", cache.manifest().encoder_hash + "/" +
                                          cache.manifest().context_mode}},
                           inputs, {options.output, options.output + ".json"});
        std::cout << "wrote checkpoint to " << options.output << "\n";
    });
}

int cmd_predict(const PredictOptions& options) {
    return guarded("predict", [&] {
        Corpus test = load_corpus(options.test_corpus);
        HiddenCache cache = HiddenCache::open(options.cache_dir);
        HeadModel model = load_head_model(options.model);
        if (!model.encoder_hash.empty()) {
            cache.require_compatible(model.encoder_hash, model.context_mode);
        }
        HiddenLookup lookup = lookup_from_cache(cache);

        AnswerSet answers;
        for (const Instance& inst : test.instances) {
            HiddenStack stack = lookup(inst.id);
            Prediction pred =
                options.backoff
                    ? predict_with_backoff(stack, inst.target_index, model, inst.lexelt)
                    : forward(stack, inst.target_index, model, inst.lexelt);
            if (pred.sense) answers.answer(inst.id, *pred.sense);
        }
        answers.save(options.output);
        write_run_manifest(options.output, "predict",
                           {{"backoff", options.backoff}},
                           {options.test_corpus, options.model}, {options.output});
        std::cout << "answered " << answers.by_id.size() << " of "
                  << test.instances.size() << " instances -> " << options.output
                  << "\n";
    });
}

int cmd_eval(const EvalOptions& options) {
    return guarded("eval", [&] {
        AnswerSet answers = AnswerSet::load(options.answers);
        Corpus gold = load_corpus(options.gold);
        EvalReport report = score(answers, gold.instances);
        std::cout << report.to_table();
        if (!options.report_json.empty()) {
            std::ofstream file(options.report_json, std::ios::trunc);
            if (!file) {
                throw InputError("cannot write report '" + options.report_json + "'");
            }
            file << report.to_json_text() << "\n";
            write_run_manifest(options.report_json, "eval", ordered_json::object(),
                               {options.answers, options.gold},
                               {options.report_json});
        }
    });
}

int cmd_significance(const SignificanceOptions& options) {
    return guarded("significance", [&] {
        AnswerSet a = AnswerSet::load(options.answers_a);
        AnswerSet b = AnswerSet::load(options.answers_b);
        Corpus gold = load_corpus(options.gold);
        SignificanceResult result =
            bootstrap_significance(a, b, gold.instances, options.resamples,
                                   options.seed, options.name_a, options.name_b);
        std::cout << result.system_a << ": F1 " << result.score_a << "\n"
                  << result.system_b << ": F1 " << result.score_b << "\n";
        if (result.better.empty()) {
            std::cout << "systems tied on the full set; not significant\n";
        } else {
            std::cout << result.better << " ahead by " << result.observed_diff
                      << "; p = " << result.p_value << " ("
                      << (result.significant ? "significant" : "not significant")
                      << " at 0.05, " << result.resamples << " resamples)\n";
        }
    });
}

int cmd_experiment(const ExperimentOptions& options) {
    return guarded("experiment", [&] {
        Corpus train_corpus = load_corpus(options.train_corpus);
        Corpus test = load_corpus(options.test_corpus);
        std::vector<Instance> dev;
        if (!options.dev_corpus.empty()) {
            dev = load_corpus(options.dev_corpus).instances;
        }
        HiddenCache cache = HiddenCache::open(options.cache_dir);
        HiddenLookup lookup = lookup_from_cache(cache);

        ExperimentConfig config;
        config.variant = head_variant_from_string(options.variant);
        config.seeds.clear();
        for (std::size_t r = 0; r < options.runs; ++r) {
            config.seeds.push_back(options.seed + r);
        }
        config.train = train_config_from(options.seed, options.epochs,
                                         options.learning_rate, options.batch_size);
        config.epoch_transfer = options.epoch_transfer;
        config.dev_ratio = options.dev_ratio;

        ExperimentResult result = run_experiment(train_corpus.instances, dev,
                                                 test.instances, lookup,
                                                 train_corpus.inventory, config);
        for (std::size_t r = 0; r < result.per_run.size(); ++r) {
            std::cout << "run " << r + 1 << " (seed " << config.seeds[r]
                      << "): F1 " << result.per_run[r].f1() << ", accuracy "
                      << result.per_run[r].accuracy() << "\n";
        }
        std::cout << "mean F1 " << result.mean_f1 << ", mean accuracy "
                  << result.mean_accuracy << " over " << result.per_run.size()
                  << " runs\n";
        if (!options.report_json.empty()) {
            ordered_json doc;
            doc["variant"] = options.variant;
            doc["runs"] = options.runs;
            doc["mean_f1"] = result.mean_f1;
            doc["mean_accuracy"] = result.mean_accuracy;
            ordered_json runs = ordered_json::array();
            for (const EvalReport& report : result.per_run) {
                runs.push_back(ordered_json::parse(report.to_json_text()));
            }
            doc["per_run"] = std::move(runs);
            std::ofstream file(options.report_json, std::ios::trunc);
            if (!file) {
                throw InputError("cannot write report '" + options.report_json + "'");
            }
            file << doc.dump(2) << "\n";
        }
    });
}

} // namespace sensekit::cli
