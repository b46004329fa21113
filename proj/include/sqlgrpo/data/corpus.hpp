// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/data/example.hpp"
#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sqlgrpo::data {

struct CorpusOptions {
    std::uint64_t seed = 1;
    std::size_t schemas = 3;
    std::size_t questions_per_schema = 40;
};

/// Template-generated parallel corpus: every question instance is rendered
/// in all seven languages and shares its id and gold SQL across them.
struct Corpus {
    std::vector<Schema> schemas;
    std::vector<DatabaseState> states;  // canonical, parallel to schemas
    std::vector<Example> train;
    std::vector<Example> dev;
};

/// Number of bundled schema blueprints.
std::size_t corpus_schema_count();
/// Distinct question instances one blueprint can produce.
std::size_t corpus_question_capacity();

/// Deterministic in the options. About a sixth of the question ids go to
/// dev, each built only from patterns and values that also occur in train. Gold
/// SQL is stored in canonical form. Throws ValidationError when a parameter
/// is zero or exceeds the bundled capacity.
Corpus generate_corpus(const CorpusOptions& options);

/// Writes <db>.schema.json and <db>.state.json per schema plus train.jsonl
/// and dev.jsonl into `dir`, creating it if needed.
void write_corpus(const Corpus& corpus, const std::string& dir);

} // namespace sqlgrpo::data
