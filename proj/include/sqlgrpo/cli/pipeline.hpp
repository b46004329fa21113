// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/cli/config.hpp"
#include "sqlgrpo/data/dataset.hpp"
#include "sqlgrpo/encoder/triplet.hpp"
#include "sqlgrpo/eval/eval.hpp"
#include "sqlgrpo/grpo/grpo.hpp"
#include "sqlgrpo/policy/sft.hpp"

#include <deque>
#include <map>
#include <string>
#include <vector>

namespace sqlgrpo::cli {

/// A data directory as written by mkdata: catalog plus both splits.
struct DataDir {
    data::Catalog catalog;
    data::Dataset train;
    data::Dataset dev;
};

DataDir load_data_dir(const std::string& dir);

/// One mining pass per negative, each seeded from the encoder seed, so every
/// positive pair is seen with negatives_per_pair sampled negatives.
std::vector<encoder::Triple> training_triples(const std::vector<Example>& train, const EncoderSection& config);

/// Question-only triples from held-out examples (no SQL positives), the
/// population the margin-satisfaction rate is reported on.
std::vector<encoder::Triple> heldout_triples(const std::vector<Example>& heldout, const EncoderSection& config);

std::vector<policy::SftExample> sft_examples(const std::vector<Example>& examples, const data::Catalog& catalog,
                                             const policy::TokenizerConfig& tokenizer);

/// GRPO prompts over a split, each with its gold context on the canonical
/// state and its parallel English question as the reference question.
/// Prompts point into this object, so it is neither copied nor moved.
class GrpoPromptSet {
public:
    GrpoPromptSet(const std::vector<Example>& examples, const data::Catalog& catalog,
                  const policy::TokenizerConfig& tokenizer);
    GrpoPromptSet(const GrpoPromptSet&) = delete;
    GrpoPromptSet& operator=(const GrpoPromptSet&) = delete;

    const std::vector<grpo::GrpoPrompt>& prompts() const { return prompts_; }

private:
    std::deque<reward::GoldContext> golds_;
    std::vector<grpo::GrpoPrompt> prompts_;
};

/// Greedy decoding of the serialized prompt. `policy` and `catalog` must
/// outlive the predictor.
eval::Predictor greedy_predictor(const policy::Policy& policy, const data::Catalog& catalog);

/// One state bank per schema of the catalog.
std::map<std::string, eval::StateBank> state_banks(const data::Catalog& catalog, const eval::EvalOptions& options);

/// Note attached to runs whose semantic reward cannot move advantages.
std::string question_mode_note();

} // namespace sqlgrpo::cli
