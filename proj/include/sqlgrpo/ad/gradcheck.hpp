// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/tensor.hpp"

#include <functional>
#include <vector>

namespace sqlgrpo::ad {

/// Compares reverse-mode grads of a scalar function against central finite
/// differences (step h) for every element of every input. Returns the worst
/// per-input relative error ||analytic - numeric||_2 / max(||analytic||_2,
/// ||numeric||_2), taken as 0 when both norms are below 1e-12.
///
/// `f` must rebuild its graph from the inputs on every call and must be
/// deterministic.
double gradcheck(const std::function<Tensor(const std::vector<Tensor>&)>& f, std::vector<Tensor> inputs,
                 double h = 1e-5);

} // namespace sqlgrpo::ad
