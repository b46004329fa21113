// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/optim.hpp"
#include "sqlgrpo/encoder/encoder.hpp"
#include "sqlgrpo/policy/policy.hpp"
#include "sqlgrpo/reward/reward.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sqlgrpo::grpo {

struct GrpoConfig {
    std::size_t group_size = 8;
    double beta = 0.02;
    std::size_t batch_prompts = 16;
    std::int64_t steps = 3000;
    double lr = 3e-4;
    std::int64_t warmup_steps = 10;
    double temperature = 1.0;
    double advantage_eps = 1e-8;
    double clip_norm = 1.0;
    reward::RewardWeights weights;
    reward::SemMode sem_mode = reward::SemMode::Question;
    /// Steps averaged into the rolling execution rate.
    std::size_t rolling_window = 20;
    std::uint64_t seed = 1;
    /// Where a diverging batch is written before aborting (empty: nowhere).
    std::string dump_dir;

    /// Throws ValidationError unless G >= 2, beta >= 0, temperature > 0 and
    /// the weights are valid.
    void validate() const;
};

nlohmann::json to_json(const GrpoConfig& c);

/// (r - mean) / (std + eps) with the population std; all zeros when
/// std < 1e-8.
std::vector<double> group_advantages(const std::vector<double>& rewards, double eps);

struct KlResult {
    std::vector<double> per_token;
    double mean = 0.0;
};
/// Exact categorical KL(p || q) per aligned position, and its mean.
KlResult kl_divergence(const std::vector<std::vector<double>>& p, const std::vector<std::vector<double>>& q);

/// One training prompt with what its candidates are scored against.
struct GrpoPrompt {
    std::vector<policy::Token> tokens;
    std::string question;
    std::string reference_question;  // parallel English question
    const reward::GoldContext* gold = nullptr;
};

struct TrainRecord {
    std::int64_t step = 0;
    double loss = 0.0;
    double mean_reward = 0.0;
    double mean_exec = 0.0;
    double mean_syntax = 0.0;
    double mean_schema = 0.0;
    double mean_sem = 0.0;
    double mean_kl = 0.0;  // per token, over the batch's candidates
    double rolling_exec_acc = 0.0;
    double grad_norm = 0.0;
    double lr = 0.0;
};

nlohmann::json to_json(const TrainRecord& r);

/// Append-only per-step records.
class TrainLog {
public:
    void append(const TrainRecord& r) { records_.push_back(r); }
    const std::vector<TrainRecord>& records() const { return records_; }
    /// One JSON object per line.
    void write_jsonl(const std::string& path) const;

private:
    std::vector<TrainRecord> records_;
};

/// Everything one step sampled and scored, kept for inspection.
struct StepDetail {
    std::vector<std::vector<policy::Completion>> completions;  // [prompt][candidate]
    std::vector<std::vector<reward::RewardBundle>> rewards;
    std::vector<std::vector<double>> advantages;
};

/// Scores one sampled completion. The default scorer parses the text and
/// combines the four reward signals against the prompt's gold context.
using RewardFn = std::function<reward::RewardBundle(const GrpoPrompt&, const policy::Completion&)>;

/// Trainer state: the policy being optimized, its frozen reference, the
/// optimizer and the log.
class GrpoTrainer {
public:
    /// `encoder` may be null only when weights.sem == 0. `policy` is trained
    /// in place (copies share parameters); the reference policy is an
    /// independent copy taken now.
    GrpoTrainer(policy::Policy policy, const encoder::Encoder* encoder, GrpoConfig config);

    /// Samples G candidates per prompt from the current policy, scores them,
    /// and applies one clipped AdamW update of
    ///   mean_prompts mean_candidates (1/|y|) sum_t [-A * log pi(y_t) + beta * KL_t(pi || pi_ref)].
    /// Throws DivergenceError on a non-finite loss or gradient.
    TrainRecord step(const std::vector<GrpoPrompt>& batch, StepDetail* detail = nullptr);

    /// Replaces the default scorer (toy tasks and tests).
    void set_reward(RewardFn fn) { reward_fn_ = std::move(fn); }

    const policy::Policy& policy() const { return policy_; }
    const policy::Policy& reference() const { return reference_; }
    const TrainLog& log() const { return log_; }
    const GrpoConfig& config() const { return config_; }

    /// Semantic reward of one candidate under the configured mode (0 when
    /// weights.sem == 0).
    double semantic(const GrpoPrompt& prompt, const reward::Candidate& candidate) const;

private:
    void dump_batch(const std::vector<GrpoPrompt>& batch, const StepDetail& detail) const;

    policy::Policy policy_;
    policy::Policy reference_;
    const encoder::Encoder* encoder_;
    GrpoConfig config_;
    RewardFn reward_fn_;
    std::vector<ad::Tensor> params_;
    ad::AdamW optimizer_;
    TrainLog log_;
    std::vector<double> recent_exec_;
    std::int64_t step_ = 0;
};

/// Runs config.steps steps over `prompts`, drawing batch_prompts per step
/// from a seeded shuffle that is reshuffled at every pass. `on_step` runs
/// after each step (for snapshots); it may be empty.
TrainLog train(GrpoTrainer& trainer, const std::vector<GrpoPrompt>& prompts,
               const std::function<void(const GrpoTrainer&)>& on_step = {});

} // namespace sqlgrpo::grpo
