#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sqlgrpo::testing {

struct OpCheck {
    std::string op;
    double worst_error = 0.0;  // max over trials
};

/// Finite-difference checks of every differentiable op on random shapes.
std::vector<OpCheck> op_gradchecks(std::uint64_t seed, int trials);

/// Finite-difference error of a full encoder forward pass over its parameters.
double encoder_gradcheck();

/// Finite-difference error of a full policy scoring pass over its parameters.
double policy_gradcheck();

/// Probability of the single rewarded completion after each of `steps` GRPO
/// updates with beta 0; entry 0 is the starting probability.
std::vector<double> bandit_trajectory(int steps);

} // namespace sqlgrpo::testing
