#include "hoconv/network/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hoconv/core/errors.hpp"
#include "hoconv/network/optim.hpp"

namespace hoconv::network {

namespace {

constexpr std::size_t kEvalChunk = 250;

std::vector<int> slice_labels(const std::vector<int>& labels, std::span<const std::size_t> idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(labels[i]);
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lr > 0.0) || weight_decay < 0.0 || batch_size < 1 || max_epochs < 1 || plateau_patience < 1 ||
        early_stop_patience < 1 || !(plateau_factor > 0.0 && plateau_factor < 1.0)) {
        throw ParameterError("invalid training configuration");
    }
}

std::vector<int> argmax_rows(const Tensor& logits) {
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    std::vector<int> out(n);
    for (std::size_t b = 0; b < n; ++b) {
        const double* z = logits.data().data() + b * k;
        out[b] = static_cast<int>(std::max_element(z, z + k) - z);
    }
    return out;
}

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                                int num_classes) {
    if (truth.size() != predicted.size()) throw ShapeError("confusion_matrix: length mismatch");
    const auto k = static_cast<std::size_t>(num_classes);
    std::vector<std::vector<long>> m(k, std::vector<long>(k, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = static_cast<std::size_t>(truth[i]), p = static_cast<std::size_t>(predicted[i]);
        if (t >= k || p >= k) throw ParameterError("confusion_matrix: class index out of range");
        ++m[t][p];
    }
    return m;
}

double confusion_accuracy(const std::vector<std::vector<long>>& confusion) {
    long trace = 0, total = 0;
    for (std::size_t i = 0; i < confusion.size(); ++i)
        for (std::size_t j = 0; j < confusion[i].size(); ++j) {
            total += confusion[i][j];
            if (i == j) trace += confusion[i][j];
        }
    return total ? static_cast<double>(trace) / static_cast<double>(total) : 0.0;
}

EvalResult evaluate(Model& model, const LabeledSet& set, int num_classes) {
    if (set.size() == 0) throw ParameterError("evaluate: empty dataset");
    const Mode previous = model.mode();
    model.set_mode(Mode::eval);
    EvalResult r;
    double loss_sum = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < set.size(); start += kEvalChunk) {
        const std::size_t stop = std::min(set.size(), start + kEvalChunk);
        idx.resize(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        const Tensor logits = model.forward(gather_images(set.images, idx));
        const auto labels = slice_labels(set.labels, idx);
        loss_sum += softmax_cross_entropy(logits, labels).loss * static_cast<double>(idx.size());
        const auto pred = argmax_rows(logits);
        r.predictions.insert(r.predictions.end(), pred.begin(), pred.end());
    }
    model.set_mode(previous);
    r.loss = loss_sum / static_cast<double>(set.size());
    r.confusion = confusion_matrix(set.labels, r.predictions, num_classes);
    r.accuracy = confusion_accuracy(r.confusion);
    return r;
}

TrainResult train(Model model, const LabeledSet& train_set, const LabeledSet& val_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (train_set.size() == 0 || val_set.size() == 0) throw ParameterError("train: datasets must be non-empty");

    Rng rng(cfg.seed);
    model.reseed_dropout(derive_seed(cfg.seed, {0xD80u}));
    const auto params = model.parameters();
    AdamWState opt;
    AdamWConfig acfg;
    acfg.lr = cfg.lr;
    acfg.weight_decay = cfg.weight_decay;
    PlateauScheduler scheduler(cfg.lr, cfg.plateau_patience, cfg.plateau_factor);
    EarlyStopper stopper(cfg.early_stop_patience);

    TrainResult result;
    result.model = model;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        // Fisher-Yates driven by the seeded stream.
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        model.set_mode(Mode::train);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t stop = std::min(order.size(), start + bs);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            model.zero_grad();
            const Tensor logits = model.forward(gather_images(train_set.images, idx));
            auto loss = softmax_cross_entropy(logits, slice_labels(train_set.labels, idx));
            if (!std::isfinite(loss.loss)) {
                throw DivergenceError(epoch, "training loss became non-finite at epoch " + std::to_string(epoch));
            }
            loss_sum += loss.loss * static_cast<double>(idx.size());
            model.backward(loss.grad);
            adamw_step(params, opt, acfg);
        }

        const EvalResult val = evaluate(model, val_set);
        if (!std::isfinite(val.loss)) {
            throw DivergenceError(epoch, "validation loss became non-finite at epoch " + std::to_string(epoch));
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), val.loss, val.accuracy, acfg.lr};
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);

        const bool stop = stopper.step(val.loss);
        if (stopper.improved_last()) {
            result.model = model;
            result.history.best_epoch = epoch;
        }
        if (stop) {
            result.history.early_stopped = true;
            break;
        }
        acfg.lr = scheduler.step(val.loss);
    }
    result.model.set_mode(Mode::eval);
    return result;
}

}  // namespace hoconv::network
