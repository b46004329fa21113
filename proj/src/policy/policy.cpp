// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/policy/policy.hpp"

#include "sqlgrpo/ad/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqlgrpo::policy {

namespace {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::RowVectorXd;
using CMapR = Eigen::Map<const MatR>;
using CMapV = Eigen::Map<const RowVec>;

constexpr double kLnEps = 1e-5;

CMapR mat(const ad::Tensor& t) {
    return CMapR(t.value().data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}
CMapV vec(const ad::Tensor& t) { return CMapV(t.value().data(), static_cast<Eigen::Index>(t.numel())); }
CMapV row(const ad::Tensor& t, std::size_t r) {
    return CMapV(t.value().data() + r * t.cols(), static_cast<Eigen::Index>(t.cols()));
}

/// Same arithmetic as ad::layer_norm on one row.
RowVec layer_norm_row(const RowVec& x, const ad::Tensor& g, const ad::Tensor& b) {
    const double n = static_cast<double>(x.size());
    double mu = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) mu += x[j];
    mu /= n;
    double var = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= n;
    const double rstd = 1.0 / std::sqrt(var + kLnEps);
    RowVec out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = (x[j] - mu) * rstd * g.value()[j] + b.value()[j];
    return out;
}

std::vector<double> softmax_vec(const std::vector<double>& logits, double temperature) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) z += (p[i] = std::exp((logits[i] - mx) / temperature));
    for (auto& x : p) x /= z;
    return p;
}

double log_softmax_at(const std::vector<double>& logits, std::size_t i) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double x : logits) z += std::exp(x - mx);
    return logits[i] - mx - std::log(z);
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

ad::Tensor normal_param(Rng& rng, ad::Shape shape, double stddev) {
    std::vector<double> v(ad::numel(shape));
    for (auto& x : v) x = stddev * rng.normal();
    return ad::Tensor::parameter(std::move(shape), std::move(v));
}

ad::Tensor const_param(ad::Shape shape, double value) {
    const auto n = ad::numel(shape);
    return ad::Tensor::parameter(std::move(shape), std::vector<double>(n, value));
}

} // namespace

void PolicyConfig::validate() const {
    if (layers == 0 || d_model == 0 || heads == 0 || d_ff == 0 || max_context == 0) {
        throw ValidationError("policy sizes must be positive");
    }
    if (d_model % heads != 0) {
        throw ValidationError("policy d_model " + std::to_string(d_model) + " is not divisible by " +
                              std::to_string(heads) + " heads");
    }
    if (tokenizer.max_prompt_len == 0 || tokenizer.max_gen_len == 0 ||
        tokenizer.max_prompt_len + tokenizer.max_gen_len > max_context) {
        throw ValidationError("prompt budget " + std::to_string(tokenizer.max_prompt_len) + " plus generation budget " +
                              std::to_string(tokenizer.max_gen_len) + " must be positive and fit the context of " +
                              std::to_string(max_context));
    }
}

nlohmann::json to_json(const PolicyConfig& c) {
    return {{"layers", c.layers},
            {"d_model", c.d_model},
            {"heads", c.heads},
            {"d_ff", c.d_ff},
            {"max_context", c.max_context},
            {"max_prompt_len", c.tokenizer.max_prompt_len},
            {"max_gen_len", c.tokenizer.max_gen_len},
            {"vocab_size", kVocabSize}};
}

PolicyConfig policy_config_from_json(const nlohmann::json& j) {
    PolicyConfig c;
    try {
        c.layers = j.at("layers").get<std::size_t>();
        c.d_model = j.at("d_model").get<std::size_t>();
        c.heads = j.at("heads").get<std::size_t>();
        c.d_ff = j.at("d_ff").get<std::size_t>();
        c.max_context = j.at("max_context").get<std::size_t>();
        c.tokenizer.max_prompt_len = j.at("max_prompt_len").get<std::size_t>();
        c.tokenizer.max_gen_len = j.at("max_gen_len").get<std::size_t>();
        if (j.value("vocab_size", kVocabSize) != kVocabSize) {
            throw FormatError("policy vocabulary size " + j.at("vocab_size").dump() + " is not " +
                              std::to_string(kVocabSize));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad policy config: ") + e.what());
    }
    return c;
}

Policy::Policy(PolicyConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    Rng rng(seed);
    const std::size_t d = config_.d_model, f = config_.d_ff;
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    // Residual branch outputs are damped so the stream starts near the embeddings.
    const double branch = 1.0 / std::sqrt(2.0 * static_cast<double>(config_.layers));
    tok_emb_ = normal_param(rng, {kVocabSize, d}, 1.0);
    pos_emb_ = normal_param(rng, {config_.max_context, d}, 0.1);
    for (std::size_t l = 0; l < config_.layers; ++l) {
        Layer L;
        L.ln1_g = const_param({d}, 1.0);
        L.ln1_b = const_param({d}, 0.0);
        L.wq = normal_param(rng, {d, d}, sd);
        L.wk = normal_param(rng, {d, d}, sd);
        L.wv = normal_param(rng, {d, d}, sd);
        L.wo = normal_param(rng, {d, d}, sd * branch);
        L.ln2_g = const_param({d}, 1.0);
        L.ln2_b = const_param({d}, 0.0);
        L.w1 = normal_param(rng, {d, f}, sd);
        L.b1 = const_param({f}, 0.0);
        L.w2 = normal_param(rng, {f, d}, branch / std::sqrt(static_cast<double>(f)));
        L.b2 = const_param({d}, 0.0);
        layers_.push_back(std::move(L));
    }
    lnf_g_ = const_param({d}, 1.0);
    lnf_b_ = const_param({d}, 0.0);
    w_out_ = normal_param(rng, {d, kVocabSize}, 0.1 * sd);
    b_out_ = const_param({kVocabSize}, 0.0);
}

std::vector<std::pair<std::string, ad::Tensor>> Policy::named() const {
    std::vector<std::pair<std::string, ad::Tensor>> out = {{"tok_emb", tok_emb_}, {"pos_emb", pos_emb_}};
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& L = layers_[l];
        const std::string p = "layers." + std::to_string(l) + ".";
        out.insert(out.end(), {{p + "ln1.gamma", L.ln1_g},
                               {p + "ln1.beta", L.ln1_b},
                               {p + "attn.q", L.wq},
                               {p + "attn.k", L.wk},
                               {p + "attn.v", L.wv},
                               {p + "attn.out", L.wo},
                               {p + "ln2.gamma", L.ln2_g},
                               {p + "ln2.beta", L.ln2_b},
                               {p + "ff1.weight", L.w1},
                               {p + "ff1.bias", L.b1},
                               {p + "ff2.weight", L.w2},
                               {p + "ff2.bias", L.b2}});
    }
    out.insert(out.end(), {{"lnf.gamma", lnf_g_}, {"lnf.beta", lnf_b_}, {"head.weight", w_out_}, {"head.bias", b_out_}});
    return out;
}

std::vector<ad::Tensor> Policy::parameters() const {
    std::vector<ad::Tensor> out;
    for (auto& [name, t] : named()) out.push_back(t);
    return out;
}

Policy Policy::clone() const { return from_checkpoint(to_checkpoint()); }

void Policy::check_context(std::size_t length) const {
    if (length > config_.max_context) {
        throw LengthError("sequence of " + std::to_string(length) + " tokens exceeds the context of " +
                          std::to_string(config_.max_context));
    }
}

ad::Tensor Policy::hidden(const std::vector<Token>& tokens) const {
    if (tokens.empty()) {
        throw LengthError("policy input is empty");
    }
    check_context(tokens.size());
    std::vector<std::int64_t> positions(tokens.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<std::int64_t>(i);
    ad::Tensor h = ad::add(ad::embedding(tok_emb_, tokens), ad::embedding(pos_emb_, positions));
    for (const Layer& L : layers_) {
        const ad::Tensor a = ad::layer_norm(h, L.ln1_g, L.ln1_b, kLnEps);
        const ad::Tensor att =
            ad::causal_attention(ad::matmul(a, L.wq), ad::matmul(a, L.wk), ad::matmul(a, L.wv), config_.heads);
        h = ad::add(h, ad::matmul(att, L.wo));
        const ad::Tensor m = ad::layer_norm(h, L.ln2_g, L.ln2_b, kLnEps);
        const ad::Tensor ff = ad::relu(ad::add(ad::matmul(m, L.w1), L.b1));
        h = ad::add(h, ad::add(ad::matmul(ff, L.w2), L.b2));
    }
    return h;
}

ad::Tensor Policy::head(const ad::Tensor& h) const {
    return ad::add(ad::matmul(ad::layer_norm(h, lnf_g_, lnf_b_, kLnEps), w_out_), b_out_);
}

ad::Tensor Policy::logits(const std::vector<Token>& tokens) const { return head(hidden(tokens)); }

ad::Tensor Policy::completion_log_probs(const std::vector<Token>& prompt, const std::vector<Token>& completion) const {
    if (prompt.empty() || completion.empty()) {
        throw LengthError("log-probabilities need a non-empty prompt and completion");
    }
    std::vector<Token> seq = prompt;
    seq.insert(seq.end(), completion.begin(), completion.end() - 1);
    const ad::Tensor h = hidden(seq);
    return ad::log_softmax(head(ad::slice_rows(h, prompt.size() - 1, seq.size())));
}

SequenceScores Policy::log_probs(const std::vector<Token>& prompt, const std::vector<Token>& completion) const {
    ad::NoGradGuard no_grad;
    const ad::Tensor lp = completion_log_probs(prompt, completion);
    SequenceScores s;
    for (std::size_t t = 0; t < completion.size(); ++t) {
        const double* r = &lp.value()[t * kVocabSize];
        std::vector<double> dist(kVocabSize);
        for (std::size_t v = 0; v < kVocabSize; ++v) dist[v] = std::exp(r[v]);
        s.token_log_probs.push_back(r[static_cast<std::size_t>(completion[t])]);
        s.total += s.token_log_probs.back();
        s.distributions.push_back(std::move(dist));
    }
    return s;
}

/// Incremental inference with a key/value cache. Reads parameter values
/// directly; never builds a graph.
class Policy::Decoder {
public:
    explicit Decoder(const Policy& p) : p_(&p), keys_(p.layers_.size()), values_(p.layers_.size()) {}

    std::size_t length() const { return pos_; }

    /// Appends a token and returns the logits for the next one.
    std::vector<double> step(Token token) {
        const PolicyConfig& c = p_->config_;
        p_->check_context(pos_ + 1);
        const auto d = static_cast<Eigen::Index>(c.d_model);
        const auto dh = static_cast<Eigen::Index>(c.d_model / c.heads);
        const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
        RowVec h = row(p_->tok_emb_, static_cast<std::size_t>(token)) + row(p_->pos_emb_, pos_);
        const auto t = static_cast<Eigen::Index>(pos_ + 1);
        std::vector<double> scores(pos_ + 1);
        for (std::size_t l = 0; l < p_->layers_.size(); ++l) {
            const Layer& L = p_->layers_[l];
            const RowVec a = layer_norm_row(h, L.ln1_g, L.ln1_b);
            const RowVec q = a * mat(L.wq);
            keys_[l].resize(static_cast<std::size_t>(t * d));
            values_[l].resize(static_cast<std::size_t>(t * d));
            Eigen::Map<MatR> K(keys_[l].data(), t, d);
            Eigen::Map<MatR> V(values_[l].data(), t, d);
            K.row(t - 1).noalias() = a * mat(L.wk);
            V.row(t - 1).noalias() = a * mat(L.wv);
            RowVec att(d);
            for (Eigen::Index hd = 0; hd < static_cast<Eigen::Index>(c.heads); ++hd) {
                const Eigen::Index c0 = hd * dh;
                double mx = -std::numeric_limits<double>::infinity();
                for (Eigen::Index j = 0; j < t; ++j) {
                    scores[static_cast<std::size_t>(j)] = q.segment(c0, dh).dot(K.row(j).segment(c0, dh));
                    mx = std::max(mx, scores[static_cast<std::size_t>(j)] * sc);
                }
                double z = 0.0;
                for (Eigen::Index j = 0; j < t; ++j) {
                    z += (scores[static_cast<std::size_t>(j)] = std::exp(scores[static_cast<std::size_t>(j)] * sc - mx));
                }
                att.segment(c0, dh).setZero();
                for (Eigen::Index j = 0; j < t; ++j) {
                    att.segment(c0, dh) += (scores[static_cast<std::size_t>(j)] / z) * V.row(j).segment(c0, dh);
                }
            }
            h += att * mat(L.wo);
            const RowVec m = layer_norm_row(h, L.ln2_g, L.ln2_b);
            const RowVec ff = (m * mat(L.w1) + vec(L.b1)).cwiseMax(0.0);
            h += ff * mat(L.w2) + vec(L.b2);
        }
        ++pos_;
        const RowVec logits = layer_norm_row(h, p_->lnf_g_, p_->lnf_b_) * mat(p_->w_out_) + vec(p_->b_out_);
        return std::vector<double>(logits.data(), logits.data() + logits.size());
    }

private:
    const Policy* p_;
    std::size_t pos_ = 0;
    std::vector<std::vector<double>> keys_;
    std::vector<std::vector<double>> values_;
};

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // Rounding left u above the running total: take the last nonzero entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.size() - 1;
}

std::vector<double> Policy::next_token_distribution(const std::vector<Token>& context, double temperature) const {
    if (context.empty() || !(temperature > 0.0)) {
        throw ValidationError("next-token distribution needs a non-empty context and a positive temperature");
    }
    Decoder dec(*this);
    std::vector<double> logits;
    for (Token t : context) logits = dec.step(t);
    return softmax_vec(logits, temperature);
}

std::vector<Completion> Policy::sample_group(const std::vector<Token>& prompt, std::size_t group_size,
                                             double temperature, std::uint64_t seed) const {
    if (prompt.empty() || group_size == 0 || !(temperature > 0.0)) {
        throw ValidationError("sampling needs a non-empty prompt, a positive group size and temperature > 0");
    }
    const std::size_t max_gen = config_.tokenizer.max_gen_len;
    check_context(prompt.size() + max_gen - 1);
    Decoder prefix(*this);
    std::vector<double> first;
    for (Token t : prompt) first = prefix.step(t);

    std::vector<Completion> out(group_size);
    for (std::size_t i = 0; i < group_size; ++i) {
        Rng rng(mix_seed(seed, i));
        Decoder dec = prefix;
        std::vector<double> logits = first;
        Completion& c = out[i];
        while (c.tokens.size() < max_gen) {
            const auto tok = static_cast<Token>(sample_index(softmax_vec(logits, temperature), rng));
            c.tokens.push_back(tok);
            c.log_probs.push_back(log_softmax_at(logits, static_cast<std::size_t>(tok)));
            if (tok == kEos) {
                c.terminated = true;
                break;
            }
            if (c.tokens.size() < max_gen) logits = dec.step(tok);
        }
    }
    return out;
}

Completion Policy::greedy(const std::vector<Token>& prompt) const {
    if (prompt.empty()) {
        throw ValidationError("greedy decoding needs a non-empty prompt");
    }
    const std::size_t max_gen = config_.tokenizer.max_gen_len;
    check_context(prompt.size() + max_gen - 1);
    Decoder dec(*this);
    std::vector<double> logits;
    for (Token t : prompt) logits = dec.step(t);
    Completion c;
    while (c.tokens.size() < max_gen) {
        const std::size_t tok = argmax(logits);
        c.tokens.push_back(static_cast<Token>(tok));
        c.log_probs.push_back(log_softmax_at(logits, tok));
        if (static_cast<Token>(tok) == kEos) {
            c.terminated = true;
            break;
        }
        if (c.tokens.size() < max_gen) logits = dec.step(static_cast<Token>(tok));
    }
    return c;
}

ad::Checkpoint Policy::to_checkpoint() const {
    ad::Checkpoint c;
    c.meta = {{"kind", "policy"}, {"config", to_json(config_)}, {"training", metadata_}};
    for (const auto& [name, t] : named()) c.tensors.push_back({name, t.shape(), t.value()});
    return c;
}

Policy Policy::from_checkpoint(const ad::Checkpoint& ckpt) {
    if (ckpt.meta.value("kind", "") != "policy" || !ckpt.meta.contains("config")) {
        throw FormatError("checkpoint is not a policy");
    }
    PolicyConfig config = policy_config_from_json(ckpt.meta.at("config"));
    try {
        config.validate();
    } catch (const ValidationError& e) {
        throw FormatError(std::string("policy checkpoint config: ") + e.what());
    }
    Policy p(config, 0);
    const auto named = p.named();
    if (ckpt.tensors.size() != named.size()) {
        throw FormatError("policy checkpoint has " + std::to_string(ckpt.tensors.size()) + " tensors, expected " +
                          std::to_string(named.size()));
    }
    for (auto [name, t] : named) ad::restore_into(ckpt, name, t);
    p.metadata_ = ckpt.meta.value("training", nlohmann::json::object());
    return p;
}

void Policy::save(const std::string& path) const { ad::save_checkpoint(path, to_checkpoint()); }

Policy Policy::load(const std::string& path) { return from_checkpoint(ad::load_checkpoint(path)); }

} // namespace sqlgrpo::policy
