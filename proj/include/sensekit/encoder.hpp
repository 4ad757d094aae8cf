#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sensekit/tensor.hpp"
#include "sensekit/tensor_store.hpp"
#include "sensekit/tokenizer.hpp"

namespace sensekit {

/// Attention logit scaling: 1/sqrt(d_v) is the default; 1/sqrt(d_k) is
/// available as a switch.
enum class AttnScale { inv_sqrt_dv, inv_sqrt_dk };

struct EncoderConfig {
    std::size_t layers = 0;        // L
    std::size_t heads = 0;         // H
    std::size_t d_model = 0;
    std::size_t d_k = 0;
    std::size_t d_v = 0;
    std::size_t d_ff = 0;
    std::size_t max_positions = 0;
    std::size_t vocab_size = 0;
    AttnScale scale = AttnScale::inv_sqrt_dv;

    float rho() const;
    void validate() const;
    /// Reconstructs the dimensions from the tensor shapes in a weight store.
    static EncoderConfig infer(const NamedTensorStore& store);
};

struct MultiHeadParams {
    std::vector<Tensor> wq; // per head, (d_k, d_model)
    std::vector<Tensor> wk; // per head, (d_k, d_model)
    std::vector<Tensor> wv; // per head, (d_v, d_model)
    Tensor w_mh;            // (d_model, H * d_v)
};

struct EncoderLayerWeights {
    MultiHeadParams attn;
    Tensor attn_ln_gain, attn_ln_bias;
    Tensor ff_w1, ff_b1, ff_w2, ff_b2;
    Tensor ff_ln_gain, ff_ln_bias;
};

/// Immutable after load. Tensor names in the store follow a fixed schema
/// with zero-based indices:
///   embed.token (vocab, d_model), embed.position, embed.segment,
///   embed.ln.gain, embed.ln.bias,
///   layer.{l}.attn.{wq,wk,wv}.{h}, layer.{l}.attn.wmh,
///   layer.{l}.attn.ln.{gain,bias},
///   layer.{l}.ffnn.{w1,b1,w2,b2}, layer.{l}.ffnn.ln.{gain,bias}
struct EncoderWeights {
    Tensor token_embedding;    // (vocab_size, d_model)
    Tensor position_embedding; // (max_positions, d_model)
    Tensor segment_embedding;  // (2, d_model)
    Tensor embed_ln_gain, embed_ln_bias;
    std::vector<EncoderLayerWeights> layers;

    static EncoderWeights from_store(const NamedTensorStore& store,
                                     const EncoderConfig& config);
    NamedTensorStore to_store() const;
    static EncoderWeights random(const EncoderConfig& config, std::uint64_t seed);
    std::uint64_t content_hash() const;
};

/// Per-word hidden states for layers 0..L; layer 0 is the pooled input
/// embedding row, layers 1..L are the encoder sub-layer outputs.
struct HiddenStack {
    std::size_t num_layers = 0; // L
    std::size_t num_words = 0;
    std::size_t width = 0; // d_model
    std::vector<float> data; // (L + 1) * num_words * width, row-major

    static HiddenStack zeros(std::size_t layers, std::size_t words, std::size_t width);
    std::span<const float> at(std::size_t layer, std::size_t word) const;
    std::span<float> at(std::size_t layer, std::size_t word);
    Tensor vec(std::size_t layer, std::size_t word) const;
};

/// Attention weights recorded during encode(); one row per
/// (layer, position, head), in that loop order.
struct AttentionTrace {
    std::vector<std::vector<float>> rows;
};

/// Softmax-weighted sum of the value columns. Keys and values are matrices
/// whose columns correspond 1:1 (keys: (d_k, n), values: (d_v, n)). If
/// weights_out is given it receives the attention distribution.
Tensor attention(const Tensor& q, const Tensor& keys, const Tensor& values,
                 float rho, std::vector<float>* weights_out = nullptr);

/// Concatenates H projected-attention heads and maps back to d_model.
Tensor multi_head(const Tensor& q, const Tensor& keys, const Tensor& values,
                  float rho, const MultiHeadParams& params);

/// w2 * relu(w1 * u + b1) + b2
Tensor ffnn(const Tensor& u, const Tensor& w1, const Tensor& b1, const Tensor& w2,
            const Tensor& b2);

/// Runs the full L-layer forward pass at piece level and mean-pools each
/// word span per layer.
HiddenStack encode(const TokenizedInput& input, const EncoderWeights& weights,
                   const EncoderConfig& config, AttentionTrace* trace = nullptr);

/// build_context + encode for one instance.
HiddenStack encode_instance(const Instance& instance, ContextMode mode,
                            const Vocabulary& vocab, const EncoderWeights& weights,
                            const EncoderConfig& config);

} // namespace sensekit
