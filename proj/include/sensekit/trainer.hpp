#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sensekit/cache.hpp"
#include "sensekit/corpus.hpp"
#include "sensekit/heads.hpp"
#include "sensekit/tensor.hpp"

namespace sensekit {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 16; // sentences per update
    std::size_t max_epochs = 50;
    std::size_t eval_every_updates = 0; // 0: evaluate at each epoch end
    std::uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

struct AdamState {
    struct Moments {
        Tensor first;
        Tensor second;
    };
    std::map<std::string, Moments> moments;
    std::uint64_t step = 0;
};

/// -log p(gold). The designated gold sense is the first listed; every listed
/// index must lie inside the distribution's support.
double nll_loss(const Tensor& distribution, const std::vector<std::size_t>& gold_indices);

/// One bias-corrected Adam update over `params`; moment tensors are created
/// lazily per parameter. Non-finite gradients abort with diagnostics.
void adam_step(const std::map<std::string, Tensor*>& params, const Gradient& grads,
               AdamState& state, const TrainConfig& config);

struct TrainResult {
    HeadModel model;       // parameters of the best checkpoint
    double dev_score = 0.0;
    std::uint64_t best_update = 0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<double> dev_history; // one entry per evaluation
};

/// Mini-batch Adam training of the head parameters on precomputed hidden
/// stacks (the encoder stays frozen). A batch is `batch_size` corpus
/// sentences; every target instance in those sentences contributes summed
/// loss. Returns the checkpoint with the best dev score (ties keep the
/// earlier update). With an empty dev set the final parameters are returned
/// (fixed-epoch mode).
TrainResult train(const std::vector<Instance>& train_set,
                  const std::vector<Instance>& dev_set, const HiddenLookup& lookup,
                  const SenseInventory& inventory, HeadVariant variant,
                  const TrainConfig& config);

struct EpochTransferResult {
    TrainResult result;  // phase-2 model
    TrainResult phase1;  // split-trained model that picked the epoch count
    std::size_t phase1_best_epoch = 0;
    std::size_t phase2_epochs_run = 0;
    double phase1_dev_score = 0.0;
};

/// Lexical-sample protocol: phase 1 splits the training data per word type
/// (dev ratio `ratio`) and finds the best epoch count; phase 2 retrains on
/// all of it for exactly that many epochs.
EpochTransferResult train_with_epoch_transfer(const std::vector<Instance>& full_train,
                                              double ratio, const HiddenLookup& lookup,
                                              const SenseInventory& inventory,
                                              HeadVariant variant,
                                              const TrainConfig& config);

/// Accuracy of predict_with_backoff over `instances` (percent).
double evaluate_accuracy(const std::vector<Instance>& instances,
                         const HiddenLookup& lookup, const HeadModel& model);

/// Mean nll_loss over the labeled instances the model has parameters for.
double evaluate_mean_loss(const std::vector<Instance>& instances,
                          const HiddenLookup& lookup, const HeadModel& model);

} // namespace sensekit
