// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/checkpoint.hpp"
#include "sqlgrpo/ad/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgrpo::encoder {

struct EncoderConfig {
    std::vector<int> ngram_sizes = {2, 3, 4};
    std::size_t buckets = 1u << 15;
    std::size_t d_enc = 128;
    std::size_t hidden = 256;
    std::size_t d_out = 256;
    double dropout = 0.1;
};

/// Hashed code-point n-gram ids of a string. Letters are ASCII-lowercased and
/// the string is framed by boundary markers before windows are taken.
/// Throws ValidationError if the text is empty after trimming.
std::vector<std::int64_t> ngram_ids(std::string_view text, const EncoderConfig& config);

/// Bag of hashed n-gram embeddings, mean-pooled, then a two-layer projection
/// head (ReLU, dropout) and L2 normalization to a unit vector.
class Encoder {
public:
    Encoder(EncoderConfig config, std::uint64_t seed);

    const EncoderConfig& config() const { return config_; }
    std::vector<ad::Tensor> parameters() const;

    /// Differentiable embedding [d_out]. `dropout_seed` is used only when
    /// `train` is set.
    ad::Tensor forward(std::string_view text, bool train, std::uint64_t dropout_seed) const;

    /// Eval-mode unit embedding.
    std::vector<double> embed(std::string_view text) const;

    ad::Checkpoint to_checkpoint() const;
    static Encoder from_checkpoint(const ad::Checkpoint& ckpt);
    void save(const std::string& path) const;
    static Encoder load(const std::string& path);

private:
    EncoderConfig config_;
    ad::Tensor table_;
    ad::Tensor w1_, b1_, w2_, b2_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

} // namespace sqlgrpo::encoder
