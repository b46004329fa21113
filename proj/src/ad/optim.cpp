// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/ad/optim.hpp"

#include <cmath>

namespace sqlgrpo::ad {

AdamW::AdamW(std::vector<Tensor> params, AdamWOptions options)
    : params_(std::move(params)), options_(options) {
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void AdamW::step(double lr) {
    for (std::size_t k = 0; k < params_.size(); ++k) {
        for (double g : params_[k].grad()) {
            if (!std::isfinite(g)) {
                throw DivergenceError("non-finite gradient in parameter " + std::to_string(k) + " of shape " +
                                      shape_string(params_[k].shape()));
            }
        }
    }
    ++step_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& w = params_[k].value();
        const auto& g = params_[k].grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.eps);
            w[i] -= lr * (update + options_.weight_decay * w[i]);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) {
        p.zero_grad();
    }
}

double lr_schedule(std::int64_t step, double base_lr, std::int64_t warmup_steps) {
    if (warmup_steps <= 0 || step >= warmup_steps) {
        return base_lr;
    }
    return base_lr * static_cast<double>(std::max<std::int64_t>(step, 0)) / static_cast<double>(warmup_steps);
}

double grad_norm(const std::vector<Tensor>& params) {
    double s = 0.0;
    for (const auto& p : params) {
        for (double g : p.grad()) {
            s += g * g;
        }
    }
    return std::sqrt(s);
}

double clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
    const double norm = grad_norm(params);
    if (!(norm > max_norm)) {
        return 1.0;
    }
    const double factor = max_norm / norm;
    for (auto& p : params) {
        if (p.grad().empty()) {
            continue;
        }
        for (double& g : p.grad()) {
            g *= factor;
        }
    }
    return factor;
}

} // namespace sqlgrpo::ad
