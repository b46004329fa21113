// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/encoder/encoder.hpp"

#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/common/text.hpp"

#include <cmath>

namespace sqlgrpo::encoder {

namespace {

constexpr char32_t kBegin = 0x02;
constexpr char32_t kEnd = 0x03;

ad::Tensor init_normal(Rng& rng, ad::Shape shape, double stddev) {
    std::vector<double> v(ad::numel(shape));
    for (auto& x : v) x = stddev * rng.normal();
    return ad::Tensor::parameter(std::move(shape), std::move(v));
}

ad::Tensor zeros_param(ad::Shape shape) {
    const auto n = ad::numel(shape);
    return ad::Tensor::parameter(std::move(shape), std::vector<double>(n, 0.0));
}

nlohmann::json config_to_json(const EncoderConfig& c) {
    return {{"ngram_sizes", c.ngram_sizes}, {"buckets", c.buckets}, {"d_enc", c.d_enc},
            {"hidden", c.hidden},           {"d_out", c.d_out},     {"dropout", c.dropout}};
}

EncoderConfig config_from_json(const nlohmann::json& j) {
    EncoderConfig c;
    try {
        c.ngram_sizes = j.at("ngram_sizes").get<std::vector<int>>();
        c.buckets = j.at("buckets").get<std::size_t>();
        c.d_enc = j.at("d_enc").get<std::size_t>();
        c.hidden = j.at("hidden").get<std::size_t>();
        c.d_out = j.at("d_out").get<std::size_t>();
        c.dropout = j.at("dropout").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("encoder config: ") + e.what());
    }
    return c;
}

} // namespace

std::vector<std::int64_t> ngram_ids(std::string_view text, const EncoderConfig& config) {
    const std::string trimmed = trim(text);
    if (trimmed.empty()) {
        throw ValidationError("cannot embed an empty string");
    }
    std::vector<char32_t> cps{kBegin};
    for (char32_t c : decode_utf8(to_lower(trimmed))) {
        cps.push_back(c);
    }
    cps.push_back(kEnd);
    std::vector<std::int64_t> ids;
    for (int n : config.ngram_sizes) {
        const auto un = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + un <= cps.size(); ++i) {
            // FNV-1a over the n-gram's code points, salted by n.
            std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(n);
            for (std::size_t k = 0; k < un; ++k) {
                for (int b = 0; b < 4; ++b) {
                    h ^= (static_cast<std::uint32_t>(cps[i + k]) >> (8 * b)) & 0xffu;
                    h *= 0x100000001b3ULL;
                }
            }
            ids.push_back(static_cast<std::int64_t>(h % config.buckets));
        }
    }
    return ids;
}

Encoder::Encoder(EncoderConfig config, std::uint64_t seed) : config_(std::move(config)) {
    Rng rng(seed);
    table_ = init_normal(rng, {config_.buckets, config_.d_enc}, 1.0);
    w1_ = init_normal(rng, {config_.d_enc, config_.hidden}, std::sqrt(2.0 / static_cast<double>(config_.d_enc)));
    b1_ = zeros_param({config_.hidden});
    w2_ = init_normal(rng, {config_.hidden, config_.d_out}, std::sqrt(1.0 / static_cast<double>(config_.hidden)));
    b2_ = zeros_param({config_.d_out});
}

std::vector<ad::Tensor> Encoder::parameters() const { return {table_, w1_, b1_, w2_, b2_}; }

ad::Tensor Encoder::forward(std::string_view text, bool train, std::uint64_t dropout_seed) const {
    const ad::Tensor pooled = ad::mean_rows(ad::embedding(table_, ngram_ids(text, config_)));
    ad::Tensor h = ad::relu(ad::add(ad::matmul(pooled, w1_), b1_));
    h = ad::dropout(h, config_.dropout, train, dropout_seed);
    return ad::l2_normalize(ad::add(ad::matmul(h, w2_), b2_));
}

std::vector<double> Encoder::embed(std::string_view text) const {
    ad::NoGradGuard no_grad;
    return forward(text, false, 0).value();
}

ad::Checkpoint Encoder::to_checkpoint() const {
    ad::Checkpoint c;
    c.meta = {{"kind", "encoder"}, {"config", config_to_json(config_)}};
    const char* names[] = {"ngram_table", "proj1.weight", "proj1.bias", "proj2.weight", "proj2.bias"};
    const auto params = parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        c.tensors.push_back({names[i], params[i].shape(), params[i].value()});
    }
    return c;
}

Encoder Encoder::from_checkpoint(const ad::Checkpoint& ckpt) {
    if (ckpt.meta.value("kind", "") != "encoder") {
        throw FormatError("checkpoint is not an encoder");
    }
    Encoder enc(config_from_json(ckpt.meta.at("config")), 0);
    ad::restore_into(ckpt, "ngram_table", enc.table_);
    ad::restore_into(ckpt, "proj1.weight", enc.w1_);
    ad::restore_into(ckpt, "proj1.bias", enc.b1_);
    ad::restore_into(ckpt, "proj2.weight", enc.w2_);
    ad::restore_into(ckpt, "proj2.bias", enc.b2_);
    return enc;
}

void Encoder::save(const std::string& path) const { ad::save_checkpoint(path, to_checkpoint()); }

Encoder Encoder::load(const std::string& path) { return from_checkpoint(ad::load_checkpoint(path)); }

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / std::sqrt(na * nb);
}

} // namespace sqlgrpo::encoder
