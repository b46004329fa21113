// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/data/example.hpp"
#include "sqlgrpo/encoder/encoder.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sqlgrpo::encoder {

struct Triple {
    std::string anchor;
    std::string positive;
    std::string negative;
};

enum class PairLanguages { All, EnPivot };

struct MiningOptions {
    double hard_fraction = 0.5;
    PairLanguages pair_languages = PairLanguages::All;
    /// Also emit (question, gold SQL text, other SQL text) triples so that
    /// questions and their SQL share an embedding neighbourhood.
    bool sql_positives = false;
};

/// Distinct code-point trigrams shared by two strings (after ASCII lowercasing).
std::size_t trigram_overlap(std::string_view a, std::string_view b);

/// Positives: every unordered pair of questions in different languages with
/// the same canonical gold SQL (anchor is the earlier one in dataset order;
/// with EnPivot only pairs involving English, anchored on the non-English
/// side). Negatives: with probability hard_fraction the same-schema
/// different-SQL question with the largest trigram overlap with the anchor
/// (first in dataset order on ties), otherwise a uniformly random
/// different-SQL question. Throws ValidationError when the data has fewer
/// than two distinct gold SQLs or yields no positive pair.
std::vector<Triple> mine_triples(const std::vector<Example>& data, std::uint64_t seed, const MiningOptions& options);

/// max(0, d(a,p) - d(a,n) + margin) with d = 1 - cosine.
double triplet_loss(const std::vector<double>& a, const std::vector<double>& p, const std::vector<double>& n,
                    double margin = 0.5);
/// Same, from precomputed distances.
double triplet_loss_from_distances(double d_ap, double d_an, double margin = 0.5);

struct TripletMetrics {
    double loss = 0.0;
    double margin_satisfaction = 0.0;  // fraction with d(a,n) - d(a,p) >= margin
    double pos_cosine = 0.0;
    double neg_cosine = 0.0;
    std::size_t count = 0;
};

TripletMetrics evaluate_triples(const Encoder& enc, const std::vector<Triple>& triples, double margin = 0.5);

struct EncoderTrainConfig {
    int epochs = 2;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    std::int64_t warmup_steps = 20;
    double weight_decay = 0.01;
    double margin = 0.5;
    std::uint64_t seed = 1;
};

struct EpochLog {
    int epoch = 0;  // 0 is the untrained encoder
    double train_loss = 0.0;
    TripletMetrics heldout;
};

/// Triplet-margin training with AdamW. Logs epoch 0 (before any update) and
/// every completed epoch. Throws DivergenceError on a non-finite loss.
std::vector<EpochLog> train_encoder(Encoder& enc, const std::vector<Triple>& train, const std::vector<Triple>& heldout,
                                    const EncoderTrainConfig& config);

} // namespace sqlgrpo::encoder
