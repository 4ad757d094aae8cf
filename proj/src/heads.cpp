#include "sensekit/heads.hpp"

#include <fstream>

#include <json.hpp>

#include "sensekit/errors.hpp"
#include "sensekit/hashing.hpp"
#include "sensekit/rng.hpp"
#include "sensekit/tensor_store.hpp"

namespace sensekit {

using ordered_json = nlohmann::ordered_json;

std::string to_string(HeadVariant variant) {
    switch (variant) {
    case HeadVariant::knn: return "1nn";
    case HeadVariant::simple: return "simple";
    case HeadVariant::lw: return "lw";
    case HeadVariant::glu: return "glu";
    case HeadVariant::glu_lw: return "glu-lw";
    }
    throw InputError("unknown head variant");
}

HeadVariant head_variant_from_string(const std::string& name) {
    if (name == "1nn") return HeadVariant::knn;
    if (name == "simple") return HeadVariant::simple;
    if (name == "lw") return HeadVariant::lw;
    if (name == "glu") return HeadVariant::glu;
    if (name == "glu-lw") return HeadVariant::glu_lw;
    throw InputError("unknown head variant '" + name + "'");
}

bool is_trainable(HeadVariant variant) {
    return variant != HeadVariant::knn;
}

bool uses_all_layers(HeadVariant variant) {
    return variant == HeadVariant::lw || variant == HeadVariant::glu_lw;
}

std::optional<std::string> knn_predict(const Tensor& query, const KnnIndex& index,
                                       const Lexelt& lexelt) {
    ensure_finite(query, "knn query");
    auto it = index.by_lexelt.find(lexelt.key());
    if (it == index.by_lexelt.end() || it->second.empty()) return std::nullopt;
    const KnnIndex::Entry* best = nullptr;
    double best_sim = 0.0;
    for (const KnnIndex::Entry& entry : it->second) {
        double sim = cosine(query, entry.vec);
        if (!best || sim > best_sim) { // strict: ties keep the earliest entry
            best = &entry;
            best_sim = sim;
        }
    }
    return best->sense;
}

std::optional<Tensor> project(const Tensor& h, const LinearHead& head,
                              const Lexelt& lexelt) {
    auto it = head.by_lexelt.find(lexelt.key());
    if (it == head.by_lexelt.end()) return std::nullopt;
    return softmax(add(matvec(it->second.w, h), it->second.b));
}

Tensor layer_weighted(const HiddenStack& stack, std::size_t word,
                      const LayerAttention& att) {
    if (stack.num_layers == 0) throw InputError("layer_weighted: empty stack");
    const std::size_t d = stack.width;
    Tensor keys = Tensor::zeros({d, stack.num_layers});
    Tensor values = Tensor::zeros({d, stack.num_layers});
    for (std::size_t l = 1; l <= stack.num_layers; ++l) {
        Tensor h = stack.vec(l, word);
        Tensor k = matvec(att.w_s, h);
        for (std::size_t i = 0; i < d; ++i) {
            keys.at(i, l - 1) = k[i];
            values.at(i, l - 1) = h[i];
        }
    }
    return attention(att.m, keys, values, 1.0f);
}

Tensor glu(const Tensor& h, const GluParams& params) {
    Tensor residual = add(add(h, matvec(params.w_h, h)), params.b_h);
    Tensor gate = sigmoid(add(matvec(params.w_g, h), params.b_g));
    return mul(residual, gate);
}

std::size_t argmax_index(const Tensor& distribution) {
    if (distribution.size() == 0) throw InputError("argmax of empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < distribution.size(); ++i) {
        if (distribution[i] > distribution[best]) best = i;
    }
    return best;
}

namespace {

Tensor pooled_input(const HiddenStack& stack, std::size_t word,
                    const HeadModel& model) {
    if (uses_all_layers(model.variant)) {
        return layer_weighted(stack, word, model.layer_attention);
    }
    return stack.vec(stack.num_layers, word);
}

} // namespace

Prediction forward(const HiddenStack& stack, std::size_t word,
                   const HeadModel& model, const Lexelt& lexelt) {
    Prediction prediction;
    if (model.variant == HeadVariant::knn) {
        prediction.sense = knn_predict(stack.vec(stack.num_layers, word), model.knn,
                                       lexelt);
        return prediction;
    }
    Tensor h = pooled_input(stack, word, model);
    if (model.variant == HeadVariant::glu || model.variant == HeadVariant::glu_lw) {
        h = glu(h, model.glu);
    }
    std::optional<Tensor> distribution = project(h, model.linear, lexelt);
    if (!distribution) return prediction;
    const SenseInventory::Entry* entry = model.inventory.find(lexelt);
    if (!entry || entry->senses.size() != distribution->size()) {
        throw ConfigMismatchError("head model: inventory does not match parameters "
                                  "for lexelt '" + lexelt.key() + "'");
    }
    prediction.distribution = *distribution;
    prediction.sense = entry->senses[argmax_index(*distribution)];
    return prediction;
}

Prediction predict_with_backoff(const HiddenStack& stack, std::size_t word,
                                const HeadModel& model, const Lexelt& lexelt) {
    Prediction prediction = forward(stack, word, model, lexelt);
    if (!prediction.sense) {
        if (auto mfs = most_frequent_sense(model.inventory, lexelt)) {
            prediction.sense = *mfs;
            prediction.used_backoff = true;
        }
    }
    return prediction;
}

HeadModel init_head_model(HeadVariant variant, const SenseInventory& inventory,
                          std::size_t d_model, std::size_t num_layers,
                          std::uint64_t seed) {
    HeadModel model;
    model.variant = variant;
    model.d_model = d_model;
    model.num_layers = num_layers;
    model.inventory = inventory;
    if (variant == HeadVariant::knn) return model;

    for (const auto& [key, entry] : inventory.entries()) {
        LinearHead::Params params;
        params.w = Tensor::zeros({entry.senses.size(), d_model});
        params.b = Tensor::zeros({entry.senses.size()});
        model.linear.by_lexelt.emplace(key, std::move(params));
    }

    Rng rng(seed);
    auto uniform_tensor = [&rng](std::vector<std::size_t> shape) {
        Tensor t = Tensor::zeros(std::move(shape));
        for (auto& v : t.data) v = static_cast<float>(rng.uniform(-0.05, 0.05));
        return t;
    };
    // Draw order is part of the checkpoint contract: m, W^s, W^h, W^g.
    if (uses_all_layers(variant)) {
        model.layer_attention.m = uniform_tensor({d_model});
        model.layer_attention.w_s = uniform_tensor({d_model, d_model});
    }
    if (variant == HeadVariant::glu || variant == HeadVariant::glu_lw) {
        model.glu.w_h = uniform_tensor({d_model, d_model});
        model.glu.w_g = uniform_tensor({d_model, d_model});
        model.glu.b_h = Tensor::zeros({d_model});
        model.glu.b_g = Tensor::zeros({d_model});
    }
    return model;
}

KnnIndex build_knn_index(const std::vector<Instance>& train,
                         const std::vector<const HiddenStack*>& stacks) {
    if (train.size() != stacks.size()) {
        throw InputError("knn index: instance/stack count mismatch");
    }
    KnnIndex index;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const Instance& inst = train[i];
        if (inst.gold_senses.empty()) continue;
        const HiddenStack& stack = *stacks[i];
        index.by_lexelt[inst.lexelt.key()].push_back(
            {stack.vec(stack.num_layers, inst.target_index),
             inst.gold_senses.front(), inst.id});
    }
    return index;
}

std::map<std::string, Tensor*> trainable_params(HeadModel& model) {
    std::map<std::string, Tensor*> params;
    if (!is_trainable(model.variant)) return params;
    for (auto& [key, lexelt_params] : model.linear.by_lexelt) {
        params["lexelt." + key + ".w"] = &lexelt_params.w;
        params["lexelt." + key + ".b"] = &lexelt_params.b;
    }
    if (uses_all_layers(model.variant)) {
        params["lw.m"] = &model.layer_attention.m;
        params["lw.ws"] = &model.layer_attention.w_s;
    }
    if (model.variant == HeadVariant::glu || model.variant == HeadVariant::glu_lw) {
        params["glu.wh"] = &model.glu.w_h;
        params["glu.bh"] = &model.glu.b_h;
        params["glu.wg"] = &model.glu.w_g;
        params["glu.bg"] = &model.glu.b_g;
    }
    return params;
}

Tape::NodeId head_logits_graph(Tape& tape, const HeadModel& model,
                               const HiddenStack& stack, std::size_t word,
                               const Lexelt& lexelt) {
    if (!is_trainable(model.variant)) {
        throw InputError("head graph: variant '" + to_string(model.variant) +
                         "' has no trainable forward pass");
    }
    auto lexelt_it = model.linear.by_lexelt.find(lexelt.key());
    if (lexelt_it == model.linear.by_lexelt.end()) {
        throw InputError("head graph: lexelt '" + lexelt.key() + "' has no parameters");
    }

    Tape::NodeId h;
    if (uses_all_layers(model.variant)) {
        Tape::NodeId m = tape.param("lw.m", model.layer_attention.m);
        Tape::NodeId w_s = tape.param("lw.ws", model.layer_attention.w_s);
        std::vector<Tape::NodeId> layer_vecs;
        std::vector<Tape::NodeId> logits;
        for (std::size_t l = 1; l <= stack.num_layers; ++l) {
            Tape::NodeId layer_vec = tape.input(stack.vec(l, word));
            layer_vecs.push_back(layer_vec);
            logits.push_back(tape.dot(m, tape.matvec(w_s, layer_vec)));
        }
        Tape::NodeId weights = tape.softmax(tape.concat_scalars(logits));
        h = tape.weighted_sum(weights, layer_vecs);
    } else {
        h = tape.input(stack.vec(stack.num_layers, word));
    }

    if (model.variant == HeadVariant::glu || model.variant == HeadVariant::glu_lw) {
        Tape::NodeId w_h = tape.param("glu.wh", model.glu.w_h);
        Tape::NodeId b_h = tape.param("glu.bh", model.glu.b_h);
        Tape::NodeId w_g = tape.param("glu.wg", model.glu.w_g);
        Tape::NodeId b_g = tape.param("glu.bg", model.glu.b_g);
        Tape::NodeId residual = tape.add(tape.add(h, tape.matvec(w_h, h)), b_h);
        Tape::NodeId gate = tape.sigmoid(tape.add(tape.matvec(w_g, h), b_g));
        h = tape.mul(residual, gate);
    }

    Tape::NodeId w = tape.param("lexelt." + lexelt.key() + ".w", lexelt_it->second.w);
    Tape::NodeId b = tape.param("lexelt." + lexelt.key() + ".b", lexelt_it->second.b);
    return tape.add(tape.matvec(w, h), b);
}

namespace {

ordered_json inventory_to_json(const SenseInventory& inventory) {
    ordered_json lexelts = ordered_json::array();
    for (const auto& [key, entry] : inventory.entries()) {
        ordered_json item;
        item["key"] = key;
        item["senses"] = entry.senses;
        item["counts"] = entry.counts;
        lexelts.push_back(std::move(item));
    }
    return lexelts;
}

SenseInventory inventory_from_json(const ordered_json& lexelts) {
    SenseInventory inventory;
    for (const auto& item : lexelts) {
        SenseInventory::Entry& entry =
            inventory.entry_for_key(item.at("key").get<std::string>());
        entry.senses = item.at("senses").get<std::vector<std::string>>();
        entry.counts = item.at("counts").get<std::vector<std::uint64_t>>();
        if (entry.senses.size() != entry.counts.size()) {
            throw InputError("checkpoint manifest: senses/counts length mismatch");
        }
    }
    return inventory;
}

} // namespace

void save_head_model(const HeadModel& model, const std::string& path) {
    NamedTensorStore store;
    ordered_json manifest;
    manifest["format"] = "head-checkpoint-v1";
    manifest["variant"] = to_string(model.variant);
    manifest["d_model"] = model.d_model;
    manifest["num_layers"] = model.num_layers;
    manifest["inventory_hash"] = hex64(model.inventory.hash());
    manifest["encoder_hash"] = model.encoder_hash;
    manifest["context_mode"] = model.context_mode;
    manifest["lexelts"] = inventory_to_json(model.inventory);

    if (model.variant == HeadVariant::knn) {
        ordered_json knn_meta = ordered_json::array();
        for (const auto& [key, entries] : model.knn.by_lexelt) {
            ordered_json item;
            item["key"] = key;
            std::vector<std::string> senses, ids;
            Tensor vectors = Tensor::zeros({entries.size(), model.d_model});
            for (std::size_t i = 0; i < entries.size(); ++i) {
                senses.push_back(entries[i].sense);
                ids.push_back(entries[i].instance_id);
                for (std::size_t j = 0; j < model.d_model; ++j) {
                    vectors.at(i, j) = entries[i].vec[j];
                }
            }
            item["senses"] = senses;
            item["instance_ids"] = ids;
            knn_meta.push_back(std::move(item));
            store.put("knn." + key, std::move(vectors));
        }
        manifest["knn"] = std::move(knn_meta);
    } else {
        for (const auto& [key, params] : model.linear.by_lexelt) {
            store.put("lexelt." + key + ".w", params.w);
            store.put("lexelt." + key + ".b", params.b);
        }
        if (uses_all_layers(model.variant)) {
            store.put("lw.m", model.layer_attention.m);
            store.put("lw.ws", model.layer_attention.w_s);
        }
        if (model.variant == HeadVariant::glu || model.variant == HeadVariant::glu_lw) {
            store.put("glu.wh", model.glu.w_h);
            store.put("glu.bh", model.glu.b_h);
            store.put("glu.wg", model.glu.w_g);
            store.put("glu.bg", model.glu.b_g);
        }
    }

    store.save(path);
    std::ofstream file(path + ".json", std::ios::trunc);
    if (!file) throw InputError("cannot write checkpoint manifest '" + path + ".json'");
    file << manifest.dump(2) << "\n";
}

HeadModel load_head_model(const std::string& path,
                          const SenseInventory* expected_inventory) {
    std::ifstream file(path + ".json");
    if (!file) throw InputError("cannot open checkpoint manifest '" + path + ".json'");
    ordered_json manifest;
    try {
        file >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("bad checkpoint manifest '" + path + ".json': " + e.what());
    }
    if (manifest.value("format", "") != std::string("head-checkpoint-v1")) {
        throw ConfigMismatchError("'" + path + "' is not a head checkpoint");
    }

    HeadModel model;
    model.variant = head_variant_from_string(manifest.at("variant").get<std::string>());
    model.d_model = manifest.at("d_model").get<std::size_t>();
    model.num_layers = manifest.at("num_layers").get<std::size_t>();
    model.inventory = inventory_from_json(manifest.at("lexelts"));
    model.encoder_hash = manifest.value("encoder_hash", "");
    model.context_mode = manifest.value("context_mode", "");

    const std::string recorded_hash = manifest.at("inventory_hash").get<std::string>();
    if (recorded_hash != hex64(model.inventory.hash())) {
        throw ConfigMismatchError("checkpoint '" + path +
                                  "': manifest inventory does not match its hash");
    }
    if (expected_inventory &&
        expected_inventory->hash() != model.inventory.hash()) {
        throw ConfigMismatchError("checkpoint '" + path +
                                  "' was trained against a different sense inventory");
    }

    NamedTensorStore store = NamedTensorStore::load(path);
    if (model.variant == HeadVariant::knn) {
        for (const auto& item : manifest.at("knn")) {
            std::string key = item.at("key").get<std::string>();
            auto senses = item.at("senses").get<std::vector<std::string>>();
            auto ids = item.at("instance_ids").get<std::vector<std::string>>();
            const Tensor& vectors = store.get("knn." + key);
            if (vectors.rows() != senses.size() || senses.size() != ids.size()) {
                throw InputError("checkpoint: knn table size mismatch for '" + key + "'");
            }
            auto& entries = model.knn.by_lexelt[key];
            for (std::size_t i = 0; i < senses.size(); ++i) {
                Tensor vec = Tensor::zeros({model.d_model});
                for (std::size_t j = 0; j < model.d_model; ++j) {
                    vec[j] = vectors.at(i, j);
                }
                entries.push_back({std::move(vec), senses[i], ids[i]});
            }
        }
        return model;
    }

    for (const auto& [key, entry] : model.inventory.entries()) {
        LinearHead::Params params;
        params.w = store.get("lexelt." + key + ".w");
        params.b = store.get("lexelt." + key + ".b");
        if (params.w.shape != std::vector<std::size_t>{entry.senses.size(), model.d_model} ||
            params.b.shape != std::vector<std::size_t>{entry.senses.size()}) {
            throw ConfigMismatchError("checkpoint: parameter shape mismatch for '" +
                                      key + "'");
        }
        model.linear.by_lexelt.emplace(key, std::move(params));
    }
    if (uses_all_layers(model.variant)) {
        model.layer_attention.m = store.get("lw.m");
        model.layer_attention.w_s = store.get("lw.ws");
    }
    if (model.variant == HeadVariant::glu || model.variant == HeadVariant::glu_lw) {
        model.glu.w_h = store.get("glu.wh");
        model.glu.b_h = store.get("glu.bh");
        model.glu.w_g = store.get("glu.wg");
        model.glu.b_g = store.get("glu.bg");
    }
    return model;
}

} // namespace sensekit
