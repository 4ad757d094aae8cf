#include "synthetic.hpp"

#include "sensekit/rng.hpp"

namespace sensekit::testing {

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    SyntheticData data;
    Rng rng(spec.seed);

    const std::vector<std::string> fillers = {"f0", "f1", "f2", "f3", "f4", "f5"};
    // Even test count keeps the two senses exactly balanced there.
    std::size_t test_count = (spec.per_type / 4) & ~std::size_t{1};

    std::vector<std::string> vocab_words = {kUnknownPiece, kClsPiece, kSepPiece};
    vocab_words.insert(vocab_words.end(), fillers.begin(), fillers.end());

    for (std::size_t k = 0; k < spec.num_types; ++k) {
        const std::string target = "w" + std::to_string(k);
        const std::string cue_a = "ca" + std::to_string(k);
        const std::string cue_b = "cb" + std::to_string(k);
        const std::string sense_a = "s" + std::to_string(k) + ".a";
        const std::string sense_b = "s" + std::to_string(k) + ".b";
        vocab_words.push_back(target);
        vocab_words.push_back(cue_a);
        vocab_words.push_back(cue_b);

        for (std::size_t i = 0; i < spec.per_type; ++i) {
            const bool is_b = i % 2 == 1;
            Instance inst;
            inst.id = target + "." + std::to_string(i);
            inst.lexelt.lemma = target;
            inst.lexelt.pos = "n";
            inst.words = {is_b ? cue_b : cue_a, target,
                          fillers[rng.below(fillers.size())]};
            inst.target_index = 1;
            inst.gold_senses = {is_b ? sense_b : sense_a};
            inst.genre = k % 2 == 0 ? "alpha" : "beta";
            if (i + test_count >= spec.per_type) {
                data.test.push_back(std::move(inst));
            } else {
                data.train.push_back(std::move(inst));
            }
        }
    }

    if (spec.label_noise > 0.0) {
        Rng noise_rng(splitmix64(spec.seed ^ 0x90153ULL));
        for (Instance& inst : data.train) {
            if (noise_rng.uniform01() < spec.label_noise) {
                std::string& sense = inst.gold_senses.front();
                sense.back() = sense.back() == 'a' ? 'b' : 'a';
            }
        }
    }

    data.inventory = build_inventory(data.train);
    data.vocab = Vocabulary::from_pieces(vocab_words, /*lowercase=*/true);

    data.config.layers = spec.encoder_layers;
    data.config.heads = 2;
    data.config.d_model = spec.d_model;
    data.config.d_k = spec.d_model / 2;
    data.config.d_v = spec.d_model / 2;
    data.config.d_ff = spec.d_model * 2;
    data.config.max_positions = 16;
    data.config.vocab_size = data.vocab.size();
    data.weights = EncoderWeights::random(data.config, splitmix64(spec.seed ^ 0xe2cULL));

    auto encode_all = [&](const std::vector<Instance>& instances) {
        for (const Instance& inst : instances) {
            data.stacks.emplace(inst.id,
                                encode_instance(inst, ContextMode::one_sent, data.vocab,
                                                data.weights, data.config));
        }
    };
    encode_all(data.train);
    encode_all(data.test);
    return data;
}

} // namespace sensekit::testing
