// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/grpo/grpo.hpp"

#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/common/text.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace sqlgrpo::grpo {

void GrpoConfig::validate() const {
    if (group_size < 2) throw ValidationError("GRPO group size must be at least 2");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("KL coefficient beta must be finite and >= 0");
    if (!(temperature > 0.0)) throw ValidationError("sampling temperature must be positive");
    if (batch_prompts == 0) throw ValidationError("GRPO batch must hold at least one prompt");
    if (steps < 0) throw ValidationError("GRPO step count must be non-negative");
    if (!(advantage_eps >= 0.0)) throw ValidationError("advantage epsilon must be non-negative");
    weights.validate();
}

nlohmann::json to_json(const GrpoConfig& c) {
    return {{"group_size", c.group_size},
            {"beta", c.beta},
            {"batch_prompts", c.batch_prompts},
            {"steps", c.steps},
            {"lr", c.lr},
            {"warmup_steps", c.warmup_steps},
            {"temperature", c.temperature},
            {"advantage_eps", c.advantage_eps},
            {"clip_norm", c.clip_norm},
            {"weights",
             {{"exec", c.weights.exec}, {"syntax", c.weights.syntax}, {"schema", c.weights.schema}, {"sem", c.weights.sem}}},
            {"sem_mode", reward::to_string(c.sem_mode)},
            {"rolling_window", c.rolling_window},
            {"seed", c.seed}};
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double eps) {
    const double n = static_cast<double>(rewards.size());
    std::vector<double> out(rewards.size(), 0.0);
    if (rewards.empty()) return out;
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double sd = std::sqrt(var / n);
    if (sd < 1e-8) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / (sd + eps);
    return out;
}

KlResult kl_divergence(const std::vector<std::vector<double>>& p, const std::vector<std::vector<double>>& q) {
    if (p.size() != q.size()) {
        throw ValidationError("KL needs aligned positions: " + std::to_string(p.size()) + " vs " +
                              std::to_string(q.size()));
    }
    KlResult r;
    for (std::size_t t = 0; t < p.size(); ++t) {
        if (p[t].size() != q[t].size()) throw ValidationError("KL distributions differ in support size");
        double kl = 0.0;
        for (std::size_t v = 0; v < p[t].size(); ++v) {
            if (p[t][v] > 0.0) kl += p[t][v] * std::log(p[t][v] / q[t][v]);
        }
        r.per_token.push_back(kl);
        r.mean += kl;
    }
    if (!p.empty()) r.mean /= static_cast<double>(p.size());
    return r;
}

nlohmann::json to_json(const TrainRecord& r) {
    return {{"step", r.step},
            {"loss", r.loss},
            {"mean_reward", r.mean_reward},
            {"mean_r_exec", r.mean_exec},
            {"mean_r_syntax", r.mean_syntax},
            {"mean_r_schema", r.mean_schema},
            {"mean_r_sem", r.mean_sem},
            {"mean_kl", r.mean_kl},
            {"rolling_exec_acc", r.rolling_exec_acc},
            {"grad_norm", r.grad_norm},
            {"lr", r.lr}};
}

void TrainLog::write_jsonl(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write train log '" + path + "'");
    for (const auto& r : records_) out << dump_json(to_json(r)) << '\n';
}

GrpoTrainer::GrpoTrainer(policy::Policy policy, const encoder::Encoder* encoder, GrpoConfig config)
    : policy_(std::move(policy)),
      reference_(policy_.clone()),
      encoder_(encoder),
      config_(std::move(config)),
      params_(policy_.parameters()),
      optimizer_(params_, ad::AdamWOptions{}) {
    config_.validate();
    if (config_.weights.sem > 0.0 && encoder_ == nullptr) {
        throw ValidationError("a semantic reward weight above 0 needs an encoder");
    }
}

double GrpoTrainer::semantic(const GrpoPrompt& prompt, const reward::Candidate& candidate) const {
    if (config_.weights.sem == 0.0) return 0.0;
    return reward::semantic_reward(*encoder_, prompt.question, prompt.reference_question, config_.sem_mode, candidate,
                                   prompt.gold->schema());
}

void GrpoTrainer::dump_batch(const std::vector<GrpoPrompt>& batch, const StepDetail& detail) const {
    if (config_.dump_dir.empty()) return;
    nlohmann::json j = {{"step", step_}, {"config", to_json(config_)}, {"prompts", nlohmann::json::array()}};
    for (std::size_t b = 0; b < batch.size(); ++b) {
        nlohmann::json p = {{"question", batch[b].question}, {"candidates", nlohmann::json::array()}};
        for (std::size_t i = 0; b < detail.completions.size() && i < detail.completions[b].size(); ++i) {
            p["candidates"].push_back({{"tokens", detail.completions[b][i].tokens},
                                       {"advantage", detail.advantages[b][i]}});
        }
        j["prompts"].push_back(std::move(p));
    }
    std::filesystem::create_directories(config_.dump_dir);
    std::ofstream(config_.dump_dir + "/divergence_step" + std::to_string(step_) + ".json") << dump_json(j, 1) << '\n';
}

TrainRecord GrpoTrainer::step(const std::vector<GrpoPrompt>& batch, StepDetail* detail) {
    if (batch.empty()) throw ValidationError("GRPO step needs at least one prompt");
    StepDetail local;
    StepDetail& d = detail ? *detail : local;
    d = StepDetail{};
    const std::size_t G = config_.group_size;
    const double norm = 1.0 / static_cast<double>(batch.size() * G);

    TrainRecord rec;
    rec.step = step_;
    rec.lr = ad::lr_schedule(step_, config_.lr, config_.warmup_steps);
    optimizer_.zero_grad();
    std::size_t kl_count = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const GrpoPrompt& p = batch[b];
        if (p.gold == nullptr && !reward_fn_) throw ValidationError("GRPO prompt without a gold context");
        const std::uint64_t sample_seed =
            mix_seed(config_.seed, static_cast<std::uint64_t>(step_) * 1000003ULL + static_cast<std::uint64_t>(b));
        auto group = policy_.sample_group(p.tokens, G, config_.temperature, sample_seed);
        std::vector<reward::RewardBundle> bundles;
        std::vector<double> totals;
        for (const auto& c : group) {
            if (reward_fn_) {
                bundles.push_back(reward_fn_(p, c));
            } else {
                const reward::Candidate cand = reward::parse_candidate(c.text());
                bundles.push_back(reward::score(cand, *p.gold, semantic(p, cand), config_.weights));
            }
            totals.push_back(bundles.back().r_total);
            rec.mean_reward += bundles.back().r_total * norm;
            rec.mean_exec += bundles.back().r_exec * norm;
            rec.mean_syntax += bundles.back().r_syntax * norm;
            rec.mean_schema += bundles.back().r_schema * norm;
            rec.mean_sem += bundles.back().r_sem * norm;
        }
        const auto adv = group_advantages(totals, config_.advantage_eps);

        for (std::size_t i = 0; i < G; ++i) {
            const auto& y = group[i].tokens;
            ad::Tensor ref_lp;
            {
                ad::NoGradGuard no_grad;
                ref_lp = reference_.completion_log_probs(p.tokens, y);
            }
            const ad::Tensor lp = policy_.completion_log_probs(p.tokens, y);
            // sum_t log pi(y_t) is minus the summed cross-entropy of the rows.
            const ad::Tensor nll = ad::sum(ad::cross_entropy(lp, y));
            const ad::Tensor kl_t = ad::sum_last(ad::mul(ad::exp(lp), ad::sub(lp, ref_lp)));
            const ad::Tensor kl = ad::sum(kl_t);
            const double inv_len = 1.0 / static_cast<double>(y.size());
            const ad::Tensor loss = ad::scale(ad::add(ad::scale(nll, adv[i]), ad::scale(kl, config_.beta)), inv_len * norm);
            const double lv = loss.item();
            if (!std::isfinite(lv)) {
                d.completions.push_back(std::move(group));
                d.rewards.push_back(std::move(bundles));
                d.advantages.push_back(adv);
                dump_batch(batch, d);
                throw DivergenceError("non-finite GRPO loss at step " + std::to_string(step_) + " on prompt '" +
                                      p.question + "'" +
                                      (config_.dump_dir.empty() ? "" : " (batch dumped to " + config_.dump_dir + ")"));
            }
            rec.loss += lv;
            for (double k : kl_t.value()) rec.mean_kl += k;
            kl_count += kl_t.numel();
            ad::backward(loss);
        }
        d.completions.push_back(std::move(group));
        d.rewards.push_back(std::move(bundles));
        d.advantages.push_back(adv);
    }
    rec.mean_kl /= static_cast<double>(std::max<std::size_t>(kl_count, 1));
    rec.grad_norm = ad::grad_norm(params_);
    ad::clip_grad_norm(params_, config_.clip_norm);
    try {
        optimizer_.step(rec.lr);
    } catch (const DivergenceError&) {
        dump_batch(batch, d);
        throw;
    }
    recent_exec_.push_back(rec.mean_syntax);
    if (recent_exec_.size() > std::max<std::size_t>(config_.rolling_window, 1)) {
        recent_exec_.erase(recent_exec_.begin());
    }
    rec.rolling_exec_acc =
        std::accumulate(recent_exec_.begin(), recent_exec_.end(), 0.0) / static_cast<double>(recent_exec_.size());
    log_.append(rec);
    ++step_;
    return rec;
}

TrainLog train(GrpoTrainer& trainer, const std::vector<GrpoPrompt>& prompts,
               const std::function<void(const GrpoTrainer&)>& on_step) {
    if (prompts.empty()) throw ValidationError("GRPO training needs prompts");
    const GrpoConfig& c = trainer.config();
    Rng rng(mix_seed(c.seed, 0x7261696eULL));
    std::vector<std::size_t> order(prompts.size());
    std::size_t cursor = order.size();
    for (std::int64_t s = 0; s < c.steps; ++s) {
        std::vector<GrpoPrompt> batch;
        while (batch.size() < c.batch_prompts) {
            if (cursor == order.size()) {
                std::iota(order.begin(), order.end(), std::size_t{0});
                rng.shuffle(order.begin(), order.end());
                cursor = 0;
            }
            batch.push_back(prompts[order[cursor++]]);
        }
        trainer.step(batch);
        if (on_step) on_step(trainer);
    }
    return trainer.log();
}

} // namespace sqlgrpo::grpo
