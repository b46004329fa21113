// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/checkpoint.hpp"
#include "sqlgrpo/ad/tensor.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/policy/tokenizer.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sqlgrpo::policy {

struct PolicyConfig {
    std::size_t layers = 2;
    std::size_t d_model = 128;
    std::size_t heads = 4;
    std::size_t d_ff = 512;
    std::size_t max_context = 512;
    TokenizerConfig tokenizer;

    /// Throws ValidationError on zero sizes, heads not dividing d_model, or
    /// prompt plus generation budgets exceeding the context.
    void validate() const;
};

nlohmann::json to_json(const PolicyConfig& c);
PolicyConfig policy_config_from_json(const nlohmann::json& j);

/// One sampled continuation. `log_probs[t]` is log pi(tokens[t] | prefix)
/// under the untempered policy. `terminated` is false when generation hit
/// max_gen_len without emitting EOS.
struct Completion {
    std::vector<Token> tokens;
    std::vector<double> log_probs;
    bool terminated = false;

    /// Completion bytes without the trailing EOS.
    std::string text() const { return detokenize(tokens); }
};

/// Per-position scores of a fixed completion.
struct SequenceScores {
    std::vector<double> token_log_probs;
    std::vector<std::vector<double>> distributions;  // next-token probabilities per position
    double total = 0.0;
};

/// Pre-LayerNorm decoder-only transformer over the byte vocabulary.
/// Copies share parameters; use clone() for an independent copy.
class Policy {
public:
    Policy(PolicyConfig config, std::uint64_t seed);

    const PolicyConfig& config() const { return config_; }
    std::vector<ad::Tensor> parameters() const;
    Policy clone() const;

    /// Free-form training metadata stored in checkpoints.
    nlohmann::json& metadata() { return metadata_; }
    const nlohmann::json& metadata() const { return metadata_; }

    /// Logits [T, V] for every position of `tokens`.
    ad::Tensor logits(const std::vector<Token>& tokens) const;
    /// Log-softmax rows [C, V] predicting each completion token given the
    /// prompt and the completion prefix. Differentiable.
    ad::Tensor completion_log_probs(const std::vector<Token>& prompt, const std::vector<Token>& completion) const;
    /// No-grad scores of a fixed completion.
    SequenceScores log_probs(const std::vector<Token>& prompt, const std::vector<Token>& completion) const;

    /// Next-token probabilities after `context` at the given temperature.
    std::vector<double> next_token_distribution(const std::vector<Token>& context, double temperature = 1.0) const;

    /// G ancestral samples at `temperature` > 0. Sample i draws from
    /// Rng(mix_seed(seed, i)), so results depend only on (prompt, seed, i).
    std::vector<Completion> sample_group(const std::vector<Token>& prompt, std::size_t group_size, double temperature,
                                         std::uint64_t seed) const;
    /// Argmax decoding.
    Completion greedy(const std::vector<Token>& prompt) const;

    ad::Checkpoint to_checkpoint() const;
    /// Throws FormatError when the metadata does not describe a policy or
    /// disagrees with the tensor shapes.
    static Policy from_checkpoint(const ad::Checkpoint& ckpt);
    void save(const std::string& path) const;
    static Policy load(const std::string& path);

private:
    struct Layer {
        ad::Tensor ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
    };
    class Decoder;

    /// Residual stream [T, d] before the final norm.
    ad::Tensor hidden(const std::vector<Token>& tokens) const;
    ad::Tensor head(const ad::Tensor& h) const;
    /// Parameter handles (aliasing storage) under their checkpoint names.
    std::vector<std::pair<std::string, ad::Tensor>> named() const;
    void check_context(std::size_t length) const;

    PolicyConfig config_;
    ad::Tensor tok_emb_, pos_emb_;
    std::vector<Layer> layers_;
    ad::Tensor lnf_g_, lnf_b_, w_out_, b_out_;
    nlohmann::json metadata_ = nlohmann::json::object();
};

/// Inverse-CDF draw from a probability vector.
std::size_t sample_index(const std::vector<double>& probs, Rng& rng);

} // namespace sqlgrpo::policy
