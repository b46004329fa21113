// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/policy/policy.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace sqlgrpo::policy {

/// A prompt and the completion it should produce (gold bytes then EOS).
struct SftExample {
    std::vector<Token> prompt;
    std::vector<Token> target;
};

/// Gold SQL bytes followed by EOS. Throws LengthError past max_gen_len.
std::vector<Token> sft_target(const std::string& gold_sql, const TokenizerConfig& config);

struct SftConfig {
    int epochs = 3;
    std::size_t batch_size = 16;
    double lr = 1e-3;
    std::int64_t warmup_steps = 50;
    double weight_decay = 0.0;
    double clip_norm = 1.0;
    /// Stop after this many optimizer steps (0: run every epoch).
    std::int64_t max_steps = 0;
    std::uint64_t seed = 1;
};

struct SftLog {
    int epoch = 0;  // 0 is before any update
    std::int64_t steps = 0;
    double train_loss = 0.0;
    double eval_loss = 0.0;
};

/// Mean per-token cross-entropy of the targets, no grad.
double sft_loss(const Policy& policy, const std::vector<SftExample>& data);

/// Teacher-forced cross-entropy training with AdamW and global-norm
/// clipping. A batch's loss is the mean over its examples of the mean
/// per-token loss. Logs epoch 0 and every finished epoch (a run cut short by
/// max_steps logs the partial epoch). Throws DivergenceError on a non-finite
/// loss.
std::vector<SftLog> sft_train(Policy& policy, const std::vector<SftExample>& train,
                              const std::vector<SftExample>& eval, const SftConfig& config);

} // namespace sqlgrpo::policy
