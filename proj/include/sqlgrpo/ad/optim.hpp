// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/tensor.hpp"

#include <cstdint>
#include <vector>

namespace sqlgrpo::ad {

struct AdamWOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

/// Adam with decoupled weight decay: the decay term scales the parameter
/// directly and never enters the moment estimates.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, AdamWOptions options);

    /// One update at learning rate `lr` from the parameters' current grads.
    /// Throws DivergenceError on a non-finite gradient, leaving parameters
    /// untouched.
    void step(double lr);
    void zero_grad();

    std::int64_t steps() const { return step_; }
    const std::vector<Tensor>& params() const { return params_; }

private:
    std::vector<Tensor> params_;
    AdamWOptions options_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::int64_t step_ = 0;
};

/// Linear ramp from 0 to base_lr over warmup_steps, constant afterwards.
double lr_schedule(std::int64_t step, double base_lr, std::int64_t warmup_steps);

/// Global L2 norm of all parameter grads (missing grads count as zero).
double grad_norm(const std::vector<Tensor>& params);

/// Rescales grads so the global norm is at most max_norm. Returns the factor
/// applied (1 when no clipping happened).
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

} // namespace sqlgrpo::ad
