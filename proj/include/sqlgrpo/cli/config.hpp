// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/data/corpus.hpp"
#include "sqlgrpo/encoder/encoder.hpp"
#include "sqlgrpo/encoder/triplet.hpp"
#include "sqlgrpo/eval/eval.hpp"
#include "sqlgrpo/grpo/grpo.hpp"
#include "sqlgrpo/policy/policy.hpp"
#include "sqlgrpo/policy/sft.hpp"

#include <json.hpp>

#include <string>

namespace sqlgrpo::cli {

struct EncoderSection {
    encoder::EncoderConfig model;
    encoder::EncoderTrainConfig train;
    encoder::MiningOptions mining;
    /// Mining passes over the training split, each with its own seed, so
    /// every positive pair meets this many sampled negatives.
    std::size_t negatives_per_pair = 8;
};

/// Every hyperparameter of a run. Defaults are the desk-scale values; the
/// shipped configs/default.toml lists them with the published alternates.
struct RunConfig {
    data::CorpusOptions data;
    EncoderSection encoder;
    policy::PolicyConfig policy;
    std::uint64_t policy_seed = 1;
    policy::SftConfig sft;
    grpo::GrpoConfig grpo;  // [rewards] maps onto grpo.weights
    /// Dev ExecAcc snapshot every this many GRPO steps (0: none).
    std::int64_t snapshot_every = 100;
    eval::EvalOptions eval;

    /// Throws ValidationError on values no run can use.
    void validate() const;
};

/// Desk-scale defaults (small policy, short runs).
RunConfig default_run_config();

/// TOML subset: [section] headers, key = value with integers, floats,
/// booleans, "strings" and flat arrays, # comments. Keys not given keep their
/// default. Unknown sections or keys and mistyped values raise
/// ValidationError naming the line.
RunConfig parse_config(const std::string& text);
/// Applies the keys of a TOML-subset text on top of `config`.
void apply_config_text(RunConfig& config, const std::string& text);
/// One "section.key=value" override, the value in TOML syntax.
void apply_override(RunConfig& config, const std::string& assignment);

/// Every key of every section, defaults materialized.
nlohmann::json to_json(const RunConfig& c);
/// Strict inverse of to_json; missing keys keep their default.
RunConfig config_from_json(const nlohmann::json& j);

/// A .toml file, or a run manifest (.json) whose "config" is replayed.
RunConfig load_config(const std::string& path);

} // namespace sqlgrpo::cli
