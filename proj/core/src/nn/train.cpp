#include "bpk/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bpk/nn/adam.hpp"
#include "bpk/rng.hpp"

namespace bpk::nn {

void TrainConfig::validate() const {
    if (epochs == 0 || batch_size == 0 || patience == 0) {
        throw std::invalid_argument("TrainConfig: counts must be positive");
    }
    if (!(lr >= 0.0)) {
        throw std::invalid_argument("TrainConfig: negative learning rate");
    }
}

namespace {

void check_records(const Model<float>& model,
                   std::span<const LabeledWindow> records,
                   const char* what) {
    if (records.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty split");
    }
    for (const LabeledWindow& rec : records) {
        if (rec.window.size() != model.cfg.input_len) {
            throw std::invalid_argument(
                std::string(what) + ": window length " +
                std::to_string(rec.window.size()) + " != model input " +
                std::to_string(model.cfg.input_len));
        }
    }
}

// Gathers records[idx[first..first+count)] into contiguous [count, L] input
// and [count, classes] one-hot label buffers.
void fill_batch(std::span<const LabeledWindow> records,
                std::span<const std::size_t> idx, std::size_t first,
                std::size_t count, std::size_t classes, float* x, float* y) {
    const std::size_t l = records[0].window.size();
    std::fill(y, y + count * classes, 0.0f);
    for (std::size_t i = 0; i < count; ++i) {
        const LabeledWindow& rec = records[idx[first + i]];
        std::copy(rec.window.begin(), rec.window.end(), x + i * l);
        y[i * classes + rec.label] = 1.0f;
    }
}

struct Snapshot {
    std::vector<Tensor<float>> tensors;

    static Snapshot of(const Model<float>& m) {
        Snapshot s;
        for (const Tensor<float>* t : m.all_tensors()) s.tensors.push_back(*t);
        return s;
    }
    void restore(Model<float>& m) const {
        auto dst = m.all_tensors();
        for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = tensors[i];
    }
};

} // namespace

EvalStats evaluate_records(const Model<float>& model,
                           std::span<const LabeledWindow> records,
                           std::size_t batch_size) {
    check_records(model, records, "evaluate_records");
    const std::size_t l = model.cfg.input_len;
    const std::size_t c = model.cfg.classes;
    TrainWorkspace<float> ws;
    std::vector<float> x(batch_size * l);
    std::vector<float> probs(batch_size * c);
    double loss = 0.0;
    std::size_t correct = 0;
    std::vector<std::size_t> ident(records.size());
    std::iota(ident.begin(), ident.end(), 0);
    std::vector<float> y(batch_size * c);
    for (std::size_t first = 0; first < records.size(); first += batch_size) {
        const std::size_t count = std::min(batch_size, records.size() - first);
        fill_batch(records, ident, first, count, c, x.data(), y.data());
        predict_batch(model, x.data(), count, probs.data(), ws);
        for (std::size_t i = 0; i < count; ++i) {
            const float* pr = probs.data() + i * c;
            std::size_t best = 0;
            for (std::size_t j = 1; j < c; ++j) {
                if (pr[j] > pr[best]) best = j;
            }
            const std::uint8_t truth = records[first + i].label;
            correct += best == truth;
            const double p = std::clamp(static_cast<double>(pr[truth]), 1e-12, 1.0);
            loss -= std::log(p);
        }
    }
    return EvalStats{loss / static_cast<double>(records.size()),
                     static_cast<double>(correct) /
                         static_cast<double>(records.size())};
}

std::vector<std::uint8_t> classify_records(
    const Model<float>& model, std::span<const LabeledWindow> records,
    std::size_t batch_size) {
    check_records(model, records, "classify_records");
    const std::size_t l = model.cfg.input_len;
    const std::size_t c = model.cfg.classes;
    TrainWorkspace<float> ws;
    std::vector<float> x(batch_size * l);
    std::vector<float> y(batch_size * c);
    std::vector<float> probs(batch_size * c);
    std::vector<std::size_t> ident(records.size());
    std::iota(ident.begin(), ident.end(), 0);
    std::vector<std::uint8_t> out(records.size());
    for (std::size_t first = 0; first < records.size(); first += batch_size) {
        const std::size_t count = std::min(batch_size, records.size() - first);
        fill_batch(records, ident, first, count, c, x.data(), y.data());
        predict_batch(model, x.data(), count, probs.data(), ws);
        for (std::size_t i = 0; i < count; ++i) {
            const float* pr = probs.data() + i * c;
            std::size_t best = 0;
            for (std::size_t j = 1; j < c; ++j) {
                if (pr[j] > pr[best]) best = j;
            }
            out[first + i] = static_cast<std::uint8_t>(best);
        }
    }
    return out;
}

History fit(Model<float>& model, const DatasetSplit& data,
            const TrainConfig& tc, std::ostream* log) {
    tc.validate();
    check_records(model, data.train, "fit(train)");
    check_records(model, data.val, "fit(val)");
    for (const LabeledWindow& rec : data.train) {
        if (rec.label >= model.cfg.classes) {
            throw std::invalid_argument("fit: label outside class range");
        }
    }

    const std::size_t l = model.cfg.input_len;
    const std::size_t c = model.cfg.classes;
    const std::size_t n_train = data.train.size();
    const std::size_t batch = std::min(tc.batch_size, n_train);

    AdamState<float> adam = AdamState<float>::like(model, tc.lr, tc.beta1,
                                                   tc.beta2, tc.adam_epsilon);
    Gradients<float> grads = Gradients<float>::like(model);
    TrainWorkspace<float> ws;
    std::vector<float> x(batch * l);
    std::vector<float> y(batch * c);

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    SeededGenerator shuffle_rng(tc.shuffle_seed);

    History history;
    Snapshot best = Snapshot::of(model);
    std::size_t epochs_since_best = 0;

    for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
        // Fisher-Yates with the running shuffle stream
        for (std::size_t i = n_train - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(
                shuffle_rng.next_uniform() * static_cast<double>(i + 1));
            std::swap(order[i], order[std::min(j, i)]);
        }
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t first = 0; first < n_train; first += batch) {
            const std::size_t count = std::min(batch, n_train - first);
            fill_batch(data.train, order, first, count, c, x.data(), y.data());
            loss_sum += forward_backward(model, x.data(), count, y.data(),
                                         grads, ws);
            adam_step(model, grads, adam);
            ++batches;
        }
        const EvalStats val = evaluate_records(model, data.val, batch);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(batches);
        stats.val_loss = val.loss;
        stats.val_accuracy = val.accuracy;
        history.epochs.push_back(stats);
        if (log) {
            (*log) << "epoch " << epoch << "/" << tc.epochs
                   << "  train_loss=" << stats.train_loss
                   << "  val_loss=" << stats.val_loss
                   << "  val_acc=" << stats.val_accuracy << std::endl;
        }
        if (history.best_epoch == 0 ||
            val.accuracy > history.best_val_accuracy) {
            history.best_epoch = epoch;
            history.best_val_accuracy = val.accuracy;
            best = Snapshot::of(model);
            epochs_since_best = 0;
        } else if (++epochs_since_best >= tc.patience) {
            if (log) {
                (*log) << "early stop: no val-accuracy gain for "
                       << epochs_since_best << " epochs" << std::endl;
            }
            break;
        }
    }
    best.restore(model);
    return history;
}

} // namespace bpk::nn
