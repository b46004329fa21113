// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/policy/sft.hpp"

#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/ad/optim.hpp"

#include <cmath>

namespace sqlgrpo::policy {

namespace {

ad::Tensor example_loss(const Policy& policy, const SftExample& ex) {
    ad::Tensor lp = policy.completion_log_probs(ex.prompt, ex.target);
    // Picking the target column of a log-softmax row is -cross_entropy of
    // the log-probs themselves (log_softmax is idempotent).
    return ad::mean(ad::cross_entropy(lp, ex.target));
}

} // namespace

std::vector<Token> sft_target(const std::string& gold_sql, const TokenizerConfig& config) {
    std::vector<Token> t = tokenize(gold_sql);
    t.push_back(kEos);
    if (t.size() > config.max_gen_len) {
        throw LengthError("gold SQL of " + std::to_string(t.size()) + " tokens exceeds the generation budget of " +
                          std::to_string(config.max_gen_len));
    }
    return t;
}

double sft_loss(const Policy& policy, const std::vector<SftExample>& data) {
    if (data.empty()) return 0.0;
    ad::NoGradGuard no_grad;
    double total = 0.0;
    for (const auto& ex : data) total += example_loss(policy, ex).item();
    return total / static_cast<double>(data.size());
}

std::vector<SftLog> sft_train(Policy& policy, const std::vector<SftExample>& train,
                              const std::vector<SftExample>& eval, const SftConfig& config) {
    if (train.empty() || config.batch_size == 0 || config.epochs < 1) {
        throw ValidationError("SFT needs examples, a positive batch size and at least one epoch");
    }
    std::vector<SftLog> log;
    log.push_back({0, 0, sft_loss(policy, train), sft_loss(policy, eval)});

    auto params = policy.parameters();
    ad::AdamWOptions opts;
    opts.weight_decay = config.weight_decay;
    ad::AdamW opt(params, opts);
    Rng rng(config.seed);
    std::vector<std::size_t> order(train.size());
    std::int64_t step = 0;
    bool done = false;
    for (int epoch = 1; epoch <= config.epochs && !done; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            if (config.max_steps > 0 && step >= config.max_steps) {
                done = true;
                break;
            }
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            opt.zero_grad();
            double batch_loss = 0.0;
            // One backward per example keeps a single sequence graph alive.
            for (std::size_t b = start; b < end; ++b) {
                const ad::Tensor l = ad::scale(example_loss(policy, train[order[b]]), 1.0 / static_cast<double>(end - start));
                batch_loss += l.item();
                ad::backward(l);
            }
            if (!std::isfinite(batch_loss)) {
                throw DivergenceError("non-finite SFT loss at step " + std::to_string(step) + " (epoch " +
                                      std::to_string(epoch) + ")");
            }
            ad::clip_grad_norm(params, config.clip_norm);
            opt.step(ad::lr_schedule(step, config.lr, config.warmup_steps));
            ++step;
            epoch_loss += batch_loss * static_cast<double>(end - start);
            seen += end - start;
        }
        if (seen > 0) {
            log.push_back({epoch, step, epoch_loss / static_cast<double>(seen), sft_loss(policy, eval)});
        }
    }
    policy.metadata()["sft"] = {{"steps", step}, {"final_eval_loss", log.back().eval_loss}};
    return log;
}

} // namespace sqlgrpo::policy
