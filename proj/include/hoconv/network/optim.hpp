#pragma once

#include <limits>
#include <span>
#include <vector>

#include "hoconv/network/layers.hpp"

namespace hoconv::network {

struct AdamWConfig {
    double lr = 1e-3;
    double weight_decay = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamWState {
    std::vector<std::vector<double>> m, v;
    long step = 0;
};

/// Decoupled weight decay:
///   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta).
/// State buffers are created on the first call.
void adamw_step(std::span<const StateRef> params, AdamWState& state, const AdamWConfig& config);

/// Halves (by `factor`) the learning rate after `patience` consecutive epochs
/// without a strict decrease of the monitored validation loss.
class PlateauScheduler {
public:
    PlateauScheduler(double lr, int patience, double factor = 0.5)
        : lr_(lr), patience_(patience), factor_(factor) {}

    /// Records one epoch; returns the learning rate for the next epoch.
    double step(double val_loss);
    double lr() const noexcept { return lr_; }

private:
    double lr_;
    int patience_;
    double factor_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
};

/// Replays a validation-loss history through PlateauScheduler.
double reduce_lr_on_plateau(std::span<const double> val_losses, double initial_lr, int patience,
                            double factor = 0.5);

class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    /// Returns true once `patience` epochs passed without improvement.
    bool step(double val_loss);
    bool improved_last() const noexcept { return improved_; }
    int best_epoch() const noexcept { return best_epoch_; }
    double best() const noexcept { return best_; }

private:
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
    int epoch_ = -1;
    int best_epoch_ = -1;
    bool improved_ = false;
};

bool early_stop(std::span<const double> val_losses, int patience);

}  // namespace hoconv::network
