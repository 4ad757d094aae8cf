#include "sensekit/encoder.hpp"

#include <cmath>

#include "sensekit/errors.hpp"
#include "sensekit/rng.hpp"

namespace sensekit {

float EncoderConfig::rho() const {
    double d = scale == AttnScale::inv_sqrt_dv ? static_cast<double>(d_v)
                                               : static_cast<double>(d_k);
    return static_cast<float>(1.0 / std::sqrt(d));
}

void EncoderConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw InputError(std::string("encoder config: ") + name +
                                     " must be at least 1");
    };
    positive(layers, "layers");
    positive(heads, "heads");
    positive(d_model, "d_model");
    positive(d_k, "d_k");
    positive(d_v, "d_v");
    positive(d_ff, "d_ff");
    positive(max_positions, "max_positions");
    positive(vocab_size, "vocab_size");
}

namespace {

std::string layer_field(std::size_t l, const std::string& field) {
    return "layer." + std::to_string(l) + "." + field;
}

const Tensor& fetch(const NamedTensorStore& store, const std::string& name,
                    const std::vector<std::size_t>& shape) {
    const Tensor& t = store.get(name);
    if (t.shape != shape) {
        throw ConfigMismatchError("weight '" + name + "' has shape " + t.shape_str() +
                                  ", expected " + Tensor::zeros(shape).shape_str());
    }
    return t;
}

} // namespace

EncoderConfig EncoderConfig::infer(const NamedTensorStore& store) {
    EncoderConfig config;
    const Tensor& token = store.get("embed.token");
    const Tensor& position = store.get("embed.position");
    if (!token.is_matrix() || !position.is_matrix()) {
        throw ConfigMismatchError("embedding tables must be matrices");
    }
    config.vocab_size = token.rows();
    config.d_model = token.cols();
    config.max_positions = position.rows();

    while (store.contains(layer_field(config.layers, "attn.wmh"))) ++config.layers;
    if (config.layers == 0) {
        throw ConfigMismatchError("weight store has no encoder layers");
    }
    while (store.contains(layer_field(0, "attn.wq." + std::to_string(config.heads)))) {
        ++config.heads;
    }
    if (config.heads == 0) {
        throw ConfigMismatchError("weight store has no attention heads");
    }
    config.d_k = store.get(layer_field(0, "attn.wq.0")).rows();
    config.d_v = store.get(layer_field(0, "attn.wv.0")).rows();
    config.d_ff = store.get(layer_field(0, "ffnn.w1")).rows();
    config.validate();
    return config;
}

EncoderWeights EncoderWeights::from_store(const NamedTensorStore& store,
                                          const EncoderConfig& config) {
    config.validate();
    EncoderWeights weights;
    const std::size_t d = config.d_model;
    weights.token_embedding = fetch(store, "embed.token", {config.vocab_size, d});
    weights.position_embedding = fetch(store, "embed.position", {config.max_positions, d});
    weights.segment_embedding = fetch(store, "embed.segment", {2, d});
    weights.embed_ln_gain = fetch(store, "embed.ln.gain", {d});
    weights.embed_ln_bias = fetch(store, "embed.ln.bias", {d});

    for (std::size_t l = 0; l < config.layers; ++l) {
        EncoderLayerWeights layer;
        for (std::size_t h = 0; h < config.heads; ++h) {
            std::string suffix = "." + std::to_string(h);
            layer.attn.wq.push_back(fetch(store, layer_field(l, "attn.wq" + suffix),
                                          {config.d_k, d}));
            layer.attn.wk.push_back(fetch(store, layer_field(l, "attn.wk" + suffix),
                                          {config.d_k, d}));
            layer.attn.wv.push_back(fetch(store, layer_field(l, "attn.wv" + suffix),
                                          {config.d_v, d}));
        }
        layer.attn.w_mh = fetch(store, layer_field(l, "attn.wmh"),
                                {d, config.heads * config.d_v});
        layer.attn_ln_gain = fetch(store, layer_field(l, "attn.ln.gain"), {d});
        layer.attn_ln_bias = fetch(store, layer_field(l, "attn.ln.bias"), {d});
        layer.ff_w1 = fetch(store, layer_field(l, "ffnn.w1"), {config.d_ff, d});
        layer.ff_b1 = fetch(store, layer_field(l, "ffnn.b1"), {config.d_ff});
        layer.ff_w2 = fetch(store, layer_field(l, "ffnn.w2"), {d, config.d_ff});
        layer.ff_b2 = fetch(store, layer_field(l, "ffnn.b2"), {d});
        layer.ff_ln_gain = fetch(store, layer_field(l, "ffnn.ln.gain"), {d});
        layer.ff_ln_bias = fetch(store, layer_field(l, "ffnn.ln.bias"), {d});
        weights.layers.push_back(std::move(layer));
    }
    return weights;
}

NamedTensorStore EncoderWeights::to_store() const {
    NamedTensorStore store;
    store.put("embed.token", token_embedding);
    store.put("embed.position", position_embedding);
    store.put("embed.segment", segment_embedding);
    store.put("embed.ln.gain", embed_ln_gain);
    store.put("embed.ln.bias", embed_ln_bias);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const EncoderLayerWeights& layer = layers[l];
        for (std::size_t h = 0; h < layer.attn.wq.size(); ++h) {
            std::string suffix = "." + std::to_string(h);
            store.put(layer_field(l, "attn.wq" + suffix), layer.attn.wq[h]);
            store.put(layer_field(l, "attn.wk" + suffix), layer.attn.wk[h]);
            store.put(layer_field(l, "attn.wv" + suffix), layer.attn.wv[h]);
        }
        store.put(layer_field(l, "attn.wmh"), layer.attn.w_mh);
        store.put(layer_field(l, "attn.ln.gain"), layer.attn_ln_gain);
        store.put(layer_field(l, "attn.ln.bias"), layer.attn_ln_bias);
        store.put(layer_field(l, "ffnn.w1"), layer.ff_w1);
        store.put(layer_field(l, "ffnn.b1"), layer.ff_b1);
        store.put(layer_field(l, "ffnn.w2"), layer.ff_w2);
        store.put(layer_field(l, "ffnn.b2"), layer.ff_b2);
        store.put(layer_field(l, "ffnn.ln.gain"), layer.ff_ln_gain);
        store.put(layer_field(l, "ffnn.ln.bias"), layer.ff_ln_bias);
    }
    return store;
}

EncoderWeights EncoderWeights::random(const EncoderConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    auto uniform_tensor = [&rng](std::vector<std::size_t> shape, double lo, double hi) {
        Tensor t = Tensor::zeros(std::move(shape));
        for (auto& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
        return t;
    };
    auto ln_gain = [&rng](std::size_t d) {
        Tensor t = Tensor::full({d}, 1.0f);
        for (auto& v : t.data) v += static_cast<float>(rng.uniform(-0.1, 0.1));
        return t;
    };

    const std::size_t d = config.d_model;
    EncoderWeights weights;
    weights.token_embedding = uniform_tensor({config.vocab_size, d}, -0.5, 0.5);
    weights.position_embedding = uniform_tensor({config.max_positions, d}, -0.1, 0.1);
    weights.segment_embedding = uniform_tensor({2, d}, -0.1, 0.1);
    weights.embed_ln_gain = ln_gain(d);
    weights.embed_ln_bias = uniform_tensor({d}, -0.05, 0.05);
    for (std::size_t l = 0; l < config.layers; ++l) {
        EncoderLayerWeights layer;
        for (std::size_t h = 0; h < config.heads; ++h) {
            layer.attn.wq.push_back(uniform_tensor({config.d_k, d}, -0.3, 0.3));
            layer.attn.wk.push_back(uniform_tensor({config.d_k, d}, -0.3, 0.3));
            layer.attn.wv.push_back(uniform_tensor({config.d_v, d}, -0.3, 0.3));
        }
        layer.attn.w_mh = uniform_tensor({d, config.heads * config.d_v}, -0.3, 0.3);
        layer.attn_ln_gain = ln_gain(d);
        layer.attn_ln_bias = uniform_tensor({d}, -0.05, 0.05);
        layer.ff_w1 = uniform_tensor({config.d_ff, d}, -0.3, 0.3);
        layer.ff_b1 = uniform_tensor({config.d_ff}, -0.05, 0.05);
        layer.ff_w2 = uniform_tensor({d, config.d_ff}, -0.3, 0.3);
        layer.ff_b2 = uniform_tensor({d}, -0.05, 0.05);
        layer.ff_ln_gain = ln_gain(d);
        layer.ff_ln_bias = uniform_tensor({d}, -0.05, 0.05);
        weights.layers.push_back(std::move(layer));
    }
    return weights;
}

std::uint64_t EncoderWeights::content_hash() const {
    return to_store().content_hash();
}

HiddenStack HiddenStack::zeros(std::size_t layers, std::size_t words,
                               std::size_t width) {
    HiddenStack stack;
    stack.num_layers = layers;
    stack.num_words = words;
    stack.width = width;
    stack.data.assign((layers + 1) * words * width, 0.0f);
    return stack;
}

std::span<const float> HiddenStack::at(std::size_t layer, std::size_t word) const {
    if (layer > num_layers || word >= num_words) {
        throw InputError("hidden stack: index out of range");
    }
    return {data.data() + (layer * num_words + word) * width, width};
}

std::span<float> HiddenStack::at(std::size_t layer, std::size_t word) {
    if (layer > num_layers || word >= num_words) {
        throw InputError("hidden stack: index out of range");
    }
    return {data.data() + (layer * num_words + word) * width, width};
}

Tensor HiddenStack::vec(std::size_t layer, std::size_t word) const {
    auto span = at(layer, word);
    return Tensor::vector({span.begin(), span.end()});
}

Tensor attention(const Tensor& q, const Tensor& keys, const Tensor& values,
                 float rho, std::vector<float>* weights_out) {
    if (!keys.is_matrix() || !values.is_matrix() || keys.cols() != values.cols()) {
        throw InputError("attention: keys " + keys.shape_str() + " and values " +
                         values.shape_str() + " must have equal column counts");
    }
    if (!q.is_vector() || q.size() != keys.rows()) {
        throw InputError("attention: query length " + q.shape_str() +
                         " does not match key length " + keys.shape_str());
    }
    const std::size_t n = keys.cols();
    Tensor logits = Tensor::zeros({n});
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < keys.rows(); ++i) {
            acc += static_cast<double>(keys.at(i, j)) * q[i];
        }
        logits[j] = static_cast<float>(rho * acc);
    }
    Tensor alpha = softmax(logits);
    if (weights_out) weights_out->assign(alpha.data.begin(), alpha.data.end());

    Tensor out = Tensor::zeros({values.rows()});
    for (std::size_t i = 0; i < values.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += static_cast<double>(alpha[j]) * values.at(i, j);
        }
        out[i] = static_cast<float>(acc);
    }
    ensure_finite(out, "attention");
    return out;
}

Tensor multi_head(const Tensor& q, const Tensor& keys, const Tensor& values,
                  float rho, const MultiHeadParams& params) {
    const std::size_t head_count = params.wq.size();
    if (head_count == 0 || params.wk.size() != head_count ||
        params.wv.size() != head_count) {
        throw InputError("multi_head: inconsistent head parameter counts");
    }
    const std::size_t d_v = params.wv[0].rows();
    if (params.w_mh.cols() != head_count * d_v) {
        throw InputError("multi_head: w_mh shape " + params.w_mh.shape_str() +
                         " does not match " + std::to_string(head_count) +
                         " heads of width " + std::to_string(d_v));
    }
    Tensor concat = Tensor::zeros({head_count * d_v});
    for (std::size_t h = 0; h < head_count; ++h) {
        Tensor head = attention(matvec(params.wq[h], q), matmul(params.wk[h], keys),
                                matmul(params.wv[h], values), rho);
        for (std::size_t i = 0; i < d_v; ++i) concat[h * d_v + i] = head[i];
    }
    return matvec(params.w_mh, concat);
}

Tensor ffnn(const Tensor& u, const Tensor& w1, const Tensor& b1, const Tensor& w2,
            const Tensor& b2) {
    return add(matvec(w2, relu(add(matvec(w1, u), b1))), b2);
}

HiddenStack encode(const TokenizedInput& input, const EncoderWeights& weights,
                   const EncoderConfig& config, AttentionTrace* trace) {
    config.validate();
    const std::size_t n = input.num_pieces();
    const std::size_t d = config.d_model;
    if (n == 0) throw InputError("encode: empty input");
    if (n > config.max_positions) {
        throw InputError("encode: " + std::to_string(n) + " pieces exceed max_positions=" +
                         std::to_string(config.max_positions) + "; input requires " +
                         std::to_string(n - config.max_positions) + " pieces of truncation");
    }
    if (input.segments.size() != n) {
        throw InputError("encode: segment ids do not cover the pieces");
    }
    for (const WordSpan& span : input.word_spans) {
        if (span.begin >= span.end || span.end > n) {
            throw InputError("encode: invalid word span");
        }
    }

    // Piece-level states for the current and previous layer; column i holds
    // piece i so attention can consume them directly.
    auto as_columns = [&](const std::vector<Tensor>& pieces) {
        Tensor m = Tensor::zeros({d, n});
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < d; ++i) m.at(i, j) = pieces[j][i];
        }
        return m;
    };

    std::vector<Tensor> state(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::int32_t piece = input.pieces[j];
        if (piece < 0 || static_cast<std::size_t>(piece) >= config.vocab_size) {
            throw InputError("encode: piece id out of vocabulary range");
        }
        std::int32_t segment = input.segments[j];
        if (segment < 0 || segment > 1) {
            throw InputError("encode: segment id must be 0 or 1");
        }
        Tensor e = Tensor::zeros({d});
        for (std::size_t i = 0; i < d; ++i) {
            e[i] = weights.token_embedding.at(static_cast<std::size_t>(piece), i) +
                   weights.position_embedding.at(j, i) +
                   weights.segment_embedding.at(static_cast<std::size_t>(segment), i);
        }
        state[j] = layer_norm(e, weights.embed_ln_gain, weights.embed_ln_bias);
    }

    const std::size_t word_count = input.num_words();
    HiddenStack stack = HiddenStack::zeros(config.layers, word_count, d);
    auto pool_into = [&](std::size_t layer_idx) {
        for (std::size_t w = 0; w < word_count; ++w) {
            const WordSpan& span = input.word_spans[w];
            auto out = stack.at(layer_idx, w);
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = span.begin; j < span.end; ++j) {
                    acc += state[j][i];
                }
                out[i] = static_cast<float>(acc / static_cast<double>(span.length()));
            }
        }
    };
    pool_into(0);

    const float rho = config.rho();
    for (std::size_t l = 0; l < config.layers; ++l) {
        const EncoderLayerWeights& layer = weights.layers.at(l);
        const Tensor columns = as_columns(state);

        // Keys/values are shared across positions; project them once per head.
        std::vector<Tensor> keys(config.heads), vals(config.heads);
        for (std::size_t h = 0; h < config.heads; ++h) {
            keys[h] = matmul(layer.attn.wk[h], columns);
            vals[h] = matmul(layer.attn.wv[h], columns);
        }

        std::vector<Tensor> next(n);
        for (std::size_t j = 0; j < n; ++j) {
            Tensor concat = Tensor::zeros({config.heads * config.d_v});
            for (std::size_t h = 0; h < config.heads; ++h) {
                std::vector<float> alpha;
                Tensor head = attention(matvec(layer.attn.wq[h], state[j]), keys[h],
                                        vals[h], rho, trace ? &alpha : nullptr);
                if (trace) trace->rows.push_back(std::move(alpha));
                for (std::size_t i = 0; i < config.d_v; ++i) {
                    concat[h * config.d_v + i] = head[i];
                }
            }
            Tensor attended = matvec(layer.attn.w_mh, concat);
            Tensor f = layer_norm(add(attended, state[j]), layer.attn_ln_gain,
                                  layer.attn_ln_bias);
            Tensor transformed = ffnn(f, layer.ff_w1, layer.ff_b1, layer.ff_w2,
                                      layer.ff_b2);
            next[j] = layer_norm(add(transformed, f), layer.ff_ln_gain,
                                 layer.ff_ln_bias);
        }
        state = std::move(next);
        pool_into(l + 1);
    }
    return stack;
}

HiddenStack encode_instance(const Instance& instance, ContextMode mode,
                            const Vocabulary& vocab, const EncoderWeights& weights,
                            const EncoderConfig& config) {
    TokenizedInput input = build_context(instance, mode, vocab, config.max_positions);
    return encode(input, weights, config);
}

} // namespace sensekit
