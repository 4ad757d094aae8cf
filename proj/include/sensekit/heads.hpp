#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sensekit/corpus.hpp"
#include "sensekit/encoder.hpp"
#include "sensekit/graph.hpp"
#include "sensekit/tensor.hpp"

namespace sensekit {

enum class HeadVariant { knn, simple, lw, glu, glu_lw };

std::string to_string(HeadVariant variant);
HeadVariant head_variant_from_string(const std::string& name);
bool is_trainable(HeadVariant variant);
bool uses_all_layers(HeadVariant variant);

/// Per-lexelt store of last-layer training vectors for 1-nn matching.
struct KnnIndex {
    struct Entry {
        Tensor vec; // (d_model)
        std::string sense;
        std::string instance_id;
    };
    std::map<std::string, std::vector<Entry>> by_lexelt; // key -> corpus order
};

/// Per-lexelt affine projection onto the lexelt's sense vector.
struct LinearHead {
    struct Params {
        Tensor w; // (S, d_model)
        Tensor b; // (S)
    };
    std::map<std::string, Params> by_lexelt;
};

/// Attention pooling over the layer axis; shared across lexelts.
struct LayerAttention {
    Tensor m;   // (d_model)
    Tensor w_s; // (d_model, d_model)
};

/// Gated linear unit parameters; shared across lexelts.
struct GluParams {
    Tensor w_h, w_g; // (d_model, d_model)
    Tensor b_h, b_g; // (d_model)
};

/// Tagged union of the disambiguation strategies with everything a
/// prediction needs: parameters plus the training-side sense inventory
/// (sense order defines the output index; counts drive MFS backoff).
struct HeadModel {
    HeadVariant variant = HeadVariant::simple;
    std::size_t d_model = 0;
    std::size_t num_layers = 0;
    SenseInventory inventory;
    KnnIndex knn;
    LinearHead linear;
    LayerAttention layer_attention;
    GluParams glu;
    // Provenance of the hidden stacks the model was trained on; empty when
    // unknown. Checked against caches at predict time.
    std::string encoder_hash;
    std::string context_mode;
};

/// Sense of the max-cosine training vector; ties break toward the earliest
/// training instance. nullopt when the lexelt is not indexed.
std::optional<std::string> knn_predict(const Tensor& query, const KnnIndex& index,
                                       const Lexelt& lexelt);

/// softmax(W h + b) over the lexelt's senses; nullopt when unseen.
std::optional<Tensor> project(const Tensor& h, const LinearHead& head,
                              const Lexelt& lexelt);

/// Attention over layers 1..L with rho = 1: keys W^s h^l, values h^l,
/// query m. Output is a convex combination of the layer vectors.
Tensor layer_weighted(const HiddenStack& stack, std::size_t word,
                      const LayerAttention& att);

/// (h + W^h h + b^h) (x) sigmoid(W^g h + b^g)
Tensor glu(const Tensor& h, const GluParams& params);

/// Deterministic argmax; ties resolve to the lowest sense index.
std::size_t argmax_index(const Tensor& distribution);

struct Prediction {
    std::optional<std::string> sense;
    std::optional<Tensor> distribution;
    bool used_backoff = false;
};

/// Runs the variant's pipeline on one word of a hidden stack. Unseen
/// lexelts yield an empty prediction (no backoff here).
Prediction forward(const HiddenStack& stack, std::size_t word,
                   const HeadModel& model, const Lexelt& lexelt);

/// forward() plus MFS backoff from the model's inventory; abstains only
/// when the lexelt is entirely unknown.
Prediction predict_with_backoff(const HiddenStack& stack, std::size_t word,
                                const HeadModel& model, const Lexelt& lexelt);

/// Fresh trainable model: per-lexelt W, b zero (the untrained model is the
/// uniform predictor); shared m, W^s, W^h, W^g seeded uniform(-0.05, 0.05);
/// shared biases zero.
HeadModel init_head_model(HeadVariant variant, const SenseInventory& inventory,
                          std::size_t d_model, std::size_t num_layers,
                          std::uint64_t seed);

KnnIndex build_knn_index(const std::vector<Instance>& train,
                         const std::vector<const HiddenStack*>& stacks);

/// Canonical parameter names ("lexelt.<key>.w", "lw.m", "glu.wh", ...);
/// shared entries appear only for variants that train them.
std::map<std::string, Tensor*> trainable_params(HeadModel& model);

/// Records the variant's forward pass for one instance on the tape and
/// returns the logits node. Parameter names match trainable_params().
Tape::NodeId head_logits_graph(Tape& tape, const HeadModel& model,
                               const HiddenStack& stack, std::size_t word,
                               const Lexelt& lexelt);

/// Checkpoint container: `path` holds the tensors, `path + ".json"` the
/// manifest (variant, lexelt table with sense order and counts, inventory
/// hash, provenance). Loading against a different inventory than the
/// manifest records is refused.
void save_head_model(const HeadModel& model, const std::string& path);
HeadModel load_head_model(const std::string& path,
                          const SenseInventory* expected_inventory = nullptr);

} // namespace sensekit
