#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "bpk/dataset.hpp"
#include "bpk/nn/model.hpp"

namespace bpk::nn {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-7;
    std::uint64_t shuffle_seed = 0;
    /// Epochs without a validation-accuracy improvement before stopping.
    std::size_t patience = 3;

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct History {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0; // 1-based; 0 if never evaluated
    double best_val_accuracy = 0.0;
};

/// Shuffled mini-batch training with Adam, train-mode batch normalization
/// and best-validation-accuracy weight retention (the model is left at the
/// best epoch's weights). Optional per-epoch progress lines go to `log`.
History fit(Model<float>& model, const DatasetSplit& data,
            const TrainConfig& tc, std::ostream* log = nullptr);

/// Mean inference-mode cross-entropy and accuracy over labeled records.
struct EvalStats {
    double loss = 0.0;
    double accuracy = 0.0;
};
EvalStats evaluate_records(const Model<float>& model,
                           std::span<const LabeledWindow> records,
                           std::size_t batch_size = 32);

/// Batched argmax decisions over labeled records (labels are ignored).
std::vector<std::uint8_t> classify_records(
    const Model<float>& model, std::span<const LabeledWindow> records,
    std::size_t batch_size = 32);

} // namespace bpk::nn
