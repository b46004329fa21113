// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sqlgrpo::ad {

double gradcheck(const std::function<Tensor(const std::vector<Tensor>&)>& f, std::vector<Tensor> inputs, double h) {
    for (auto& t : inputs) {
        t.node()->requires_grad = true;
        t.zero_grad();
    }
    backward(f(inputs));
    double worst = 0.0;
    for (auto& t : inputs) {
        const std::vector<double> analytic = t.grad().empty() ? std::vector<double>(t.numel(), 0.0) : t.grad();
        std::vector<double> numeric(t.numel());
        {
            NoGradGuard no_grad;
            for (std::size_t i = 0; i < t.numel(); ++i) {
                const double x = t.value()[i];
                t.value()[i] = x + h;
                const double up = f(inputs).item();
                t.value()[i] = x - h;
                const double down = f(inputs).item();
                t.value()[i] = x;
                numeric[i] = (up - down) / (2.0 * h);
            }
        }
        double diff = 0.0, na = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < numeric.size(); ++i) {
            diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            na += analytic[i] * analytic[i];
            nn += numeric[i] * numeric[i];
        }
        const double denom = std::sqrt(std::max(na, nn));
        if (denom >= 1e-12) {
            worst = std::max(worst, std::sqrt(diff) / denom);
        }
    }
    return worst;
}

} // namespace sqlgrpo::ad
