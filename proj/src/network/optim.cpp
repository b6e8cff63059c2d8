#include "hoconv/network/optim.hpp"

#include <cmath>

#include "hoconv/core/errors.hpp"

namespace hoconv::network {

void adamw_step(std::span<const StateRef> params, AdamWState& state, const AdamWConfig& cfg) {
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.value->size(), 0.0);
            state.v.emplace_back(p.value->size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw ParameterError("adamw: parameter list changed between steps");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& theta = *params[k].value;
        const auto& g = *params[k].grad;
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * theta[i]);
        }
    }
}

double PlateauScheduler::step(double val_loss) {
    if (val_loss < best_) {
        best_ = val_loss;
        bad_ = 0;
    } else if (++bad_ >= patience_) {
        lr_ *= factor_;
        bad_ = 0;
    }
    return lr_;
}

double reduce_lr_on_plateau(std::span<const double> val_losses, double initial_lr, int patience, double factor) {
    PlateauScheduler s(initial_lr, patience, factor);
    for (double v : val_losses) s.step(v);
    return s.lr();
}

bool EarlyStopper::step(double val_loss) {
    ++epoch_;
    improved_ = val_loss < best_;
    if (improved_) {
        best_ = val_loss;
        best_epoch_ = epoch_;
        bad_ = 0;
        return false;
    }
    return ++bad_ >= patience_;
}

bool early_stop(std::span<const double> val_losses, int patience) {
    EarlyStopper s(patience);
    for (double v : val_losses)
        if (s.step(v)) return true;
    return false;
}

}  // namespace hoconv::network
