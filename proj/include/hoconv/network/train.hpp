#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hoconv/core/dataset.hpp"
#include "hoconv/network/model.hpp"

namespace hoconv::network {

struct TrainConfig {
    double lr = 1e-3;
    double weight_decay = 5e-4;
    int batch_size = 64;
    int max_epochs = 100;
    int plateau_patience = 5;
    double plateau_factor = 0.5;
    int early_stop_patience = 12;
    std::uint64_t seed = 0;  // shuffling and dropout

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;  // rate used during this epoch
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = -1;
    bool early_stopped = false;
};

struct TrainResult {
    Model model;  // weights from the best validation epoch
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch AdamW with seeded shuffling, plateau LR halving and early
/// stopping on validation loss. Throws DivergenceError on a non-finite loss.
TrainResult train(Model model, const LabeledSet& train_set, const LabeledSet& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
    std::vector<std::vector<long>> confusion;  // [true][predicted]
    std::vector<int> predictions;
};

/// Evaluates in eval mode (restores the previous mode afterwards).
EvalResult evaluate(Model& model, const LabeledSet& set, int num_classes = 10);

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                                int num_classes);
double confusion_accuracy(const std::vector<std::vector<long>>& confusion);

/// Row-wise argmax of a (N, K) logit matrix.
std::vector<int> argmax_rows(const Tensor& logits);

}  // namespace hoconv::network
