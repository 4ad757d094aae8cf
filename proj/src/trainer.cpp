#include "sensekit/trainer.hpp"

#include <cmath>

#include "sensekit/errors.hpp"
#include "sensekit/hashing.hpp"
#include "sensekit/rng.hpp"

namespace sensekit {

void TrainConfig::validate() const {
    // lr = 0 is allowed: it runs the loop without moving parameters.
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InputError("train config: learning rate must be finite and >= 0");
    }
    if (batch_size < 1) throw InputError("train config: batch size must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InputError("train config: betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw InputError("train config: epsilon must be positive");
}

double nll_loss(const Tensor& distribution, const std::vector<std::size_t>& gold_indices) {
    if (gold_indices.empty()) throw InputError("nll_loss: no gold sense given");
    for (std::size_t idx : gold_indices) {
        if (idx >= distribution.size()) {
            throw InputError("nll_loss: gold index " + std::to_string(idx) +
                             " outside distribution support of size " +
                             std::to_string(distribution.size()));
        }
    }
    double p = distribution[gold_indices.front()];
    if (!(p > 0.0)) throw NumericError("nll_loss: gold probability is not positive");
    return -std::log(p);
}

void adam_step(const std::map<std::string, Tensor*>& params, const Gradient& grads,
               AdamState& state, const TrainConfig& config) {
    config.validate();
    for (const auto& [name, grad] : grads.entries()) {
        for (float g : grad.data) {
            if (!std::isfinite(g)) {
                throw NumericError("adam_step: non-finite gradient for '" + name +
                                   "' at step " + std::to_string(state.step + 1));
            }
        }
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(config.beta1, t);
    const double bias2 = 1.0 - std::pow(config.beta2, t);

    for (const auto& [name, param] : params) {
        if (!grads.contains(name)) continue;
        const Tensor& grad = grads.at(name);
        if (!grad.same_shape(*param)) {
            throw InputError("adam_step: gradient shape mismatch for '" + name + "'");
        }
        auto [it, inserted] = state.moments.try_emplace(name);
        if (inserted) {
            it->second.first = Tensor::zeros(param->shape);
            it->second.second = Tensor::zeros(param->shape);
        }
        Tensor& m = it->second.first;
        Tensor& v = it->second.second;
        if (!m.same_shape(*param)) {
            throw InputError("adam_step: stale moment shape for '" + name + "'");
        }
        for (std::size_t i = 0; i < param->size(); ++i) {
            double g = grad[i];
            double m_new = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            double v_new = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            m[i] = static_cast<float>(m_new);
            v[i] = static_cast<float>(v_new);
            double m_hat = m_new / bias1;
            double v_hat = v_new / bias2;
            double updated = (*param)[i] -
                             config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
            if (!std::isfinite(updated)) {
                throw NumericError("adam_step: non-finite parameter '" + name + "'");
            }
            (*param)[i] = static_cast<float>(updated);
        }
    }
}

namespace {

// Instances sharing one sentence (same words and neighbors) train together.
std::vector<std::vector<std::size_t>> group_by_sentence(
    const std::vector<Instance>& instances) {
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::uint64_t, std::size_t> group_of;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const Instance& inst = instances[i];
        std::uint64_t h = kFnvOffset;
        for (const std::string& w : inst.words) {
            h = fnv1a64(w, h);
            h = fnv1a64("\x1f", h);
        }
        auto hash_neighbor = [&h](const std::optional<std::vector<std::string>>& sent) {
            h = fnv1a64("\x1e", h);
            if (!sent) return;
            for (const std::string& w : *sent) {
                h = fnv1a64(w, h);
                h = fnv1a64("\x1f", h);
            }
        };
        hash_neighbor(inst.left_neighbor);
        hash_neighbor(inst.right_neighbor);
        auto [it, inserted] = group_of.try_emplace(h, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(i);
    }
    return groups;
}

std::vector<std::size_t> gold_indices_for(const Instance& inst,
                                          const SenseInventory& inventory) {
    std::vector<std::size_t> out;
    for (const std::string& sense : inst.gold_senses) {
        if (auto idx = inventory.sense_index(inst.lexelt, sense)) {
            out.push_back(*idx);
        }
    }
    return out;
}

} // namespace

double evaluate_accuracy(const std::vector<Instance>& instances,
                         const HiddenLookup& lookup, const HeadModel& model) {
    if (instances.empty()) return 0.0;
    std::size_t correct = 0;
    for (const Instance& inst : instances) {
        HiddenStack stack = lookup(inst.id);
        Prediction pred = predict_with_backoff(stack, inst.target_index, model,
                                               inst.lexelt);
        if (!pred.sense) continue;
        for (const std::string& gold : inst.gold_senses) {
            if (gold == *pred.sense) {
                ++correct;
                break;
            }
        }
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(instances.size());
}

double evaluate_mean_loss(const std::vector<Instance>& instances,
                          const HiddenLookup& lookup, const HeadModel& model) {
    double total = 0.0;
    std::size_t counted = 0;
    for (const Instance& inst : instances) {
        if (inst.gold_senses.empty()) continue;
        std::vector<std::size_t> gold = gold_indices_for(inst, model.inventory);
        if (gold.empty()) continue;
        HiddenStack stack = lookup(inst.id);
        Prediction pred = forward(stack, inst.target_index, model, inst.lexelt);
        if (!pred.distribution) continue;
        total += nll_loss(*pred.distribution, gold);
        ++counted;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

TrainResult train(const std::vector<Instance>& train_set,
                  const std::vector<Instance>& dev_set, const HiddenLookup& lookup,
                  const SenseInventory& inventory, HeadVariant variant,
                  const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) throw InputError("train: empty training set");
    if (!is_trainable(variant)) {
        throw InputError("train: variant '" + to_string(variant) + "' is not trained");
    }
    if (dev_set.empty() && config.max_epochs == 0) {
        throw InputError("train: empty dev set requires a fixed epoch budget");
    }

    HiddenStack probe = lookup(train_set.front().id);
    HeadModel model = init_head_model(variant, inventory, probe.width,
                                      probe.num_layers, config.seed);
    std::map<std::string, Tensor*> params = trainable_params(model);
    AdamState adam;
    Rng shuffle_rng(splitmix64(config.seed ^ 0x5eed5eedULL));

    std::vector<std::vector<std::size_t>> sentences = group_by_sentence(train_set);

    TrainResult best;
    best.dev_score = -1.0;
    std::uint64_t update = 0;
    bool have_best = false;

    auto consider_checkpoint = [&](std::size_t epoch) {
        if (dev_set.empty()) return;
        double score = evaluate_accuracy(dev_set, lookup, model);
        best.dev_history.push_back(score);
        if (!have_best || score > best.dev_score) {
            best.model = model;
            best.dev_score = score;
            best.best_update = update;
            best.best_epoch = epoch;
            have_best = true;
        }
    };

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(sentences);
        for (std::size_t start = 0; start < sentences.size();
             start += config.batch_size) {
            Gradient batch_grads;
            std::size_t end = std::min(start + config.batch_size, sentences.size());
            for (std::size_t s = start; s < end; ++s) {
                for (std::size_t idx : sentences[s]) {
                    const Instance& inst = train_set[idx];
                    if (inst.gold_senses.empty()) continue;
                    std::vector<std::size_t> gold = gold_indices_for(inst, inventory);
                    if (gold.empty()) continue;
                    HiddenStack stack = lookup(inst.id);
                    Tape tape;
                    Tape::NodeId logits =
                        head_logits_graph(tape, model, stack, inst.target_index,
                                          inst.lexelt);
                    Tape::NodeId loss = tape.nll(logits, gold.front());
                    batch_grads.add_scaled(tape.backward(loss));
                }
            }
            adam_step(params, batch_grads, adam, config);
            ++update;
            if (config.eval_every_updates > 0 &&
                update % config.eval_every_updates == 0) {
                consider_checkpoint(epoch);
            }
        }
        if (config.eval_every_updates == 0) consider_checkpoint(epoch);
    }

    if (!have_best) {
        // Fixed-epoch mode: the final parameters are the checkpoint.
        best.model = model;
        best.dev_score = 0.0;
        best.best_update = update;
        best.best_epoch = config.max_epochs;
    }
    best.epochs_run = config.max_epochs;
    return best;
}

EpochTransferResult train_with_epoch_transfer(const std::vector<Instance>& full_train,
                                              double ratio, const HiddenLookup& lookup,
                                              const SenseInventory& inventory,
                                              HeadVariant variant,
                                              const TrainConfig& config) {
    SplitPlan plan = make_lexical_sample_split(full_train, ratio, config.seed);
    std::vector<Instance> phase1_train, phase1_dev;
    for (const Instance& inst : full_train) {
        if (plan.bucket(inst.id) == SplitBucket::dev) {
            phase1_dev.push_back(inst);
        } else {
            phase1_train.push_back(inst);
        }
    }
    if (phase1_dev.empty()) {
        throw InputError("epoch transfer: the split produced an empty dev set");
    }

    TrainResult phase1 = train(phase1_train, phase1_dev, lookup, inventory, variant,
                               config);

    TrainConfig phase2_config = config;
    phase2_config.max_epochs = phase1.best_epoch;
    TrainResult phase2 = train(full_train, {}, lookup, inventory, variant,
                               phase2_config);

    EpochTransferResult result;
    result.result = std::move(phase2);
    result.phase1_best_epoch = phase1.best_epoch;
    result.phase2_epochs_run = result.result.epochs_run;
    result.phase1_dev_score = phase1.dev_score;
    result.phase1 = std::move(phase1);
    return result;
}

} // namespace sensekit
