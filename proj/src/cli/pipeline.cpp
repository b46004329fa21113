// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/cli/pipeline.hpp"

#include "sqlgrpo/common/rng.hpp"

#include <filesystem>

namespace sqlgrpo::cli {

namespace {

// Seed streams derived from the encoder seed.
constexpr std::uint64_t kMiningStream = 100;
constexpr std::uint64_t kHeldoutStream = 99;

} // namespace

DataDir load_data_dir(const std::string& dir) {
    const std::filesystem::path root(dir);
    if (!std::filesystem::is_directory(root)) throw ValidationError("no data directory " + dir);
    DataDir d;
    d.catalog = data::Catalog::load(dir);
    d.train = data::ingest((root / "train.jsonl").string(), d.catalog, "train");
    d.dev = data::ingest((root / "dev.jsonl").string(), d.catalog, "dev");
    return d;
}

std::vector<encoder::Triple> training_triples(const std::vector<Example>& train, const EncoderSection& config) {
    std::vector<encoder::Triple> out;
    for (std::size_t r = 0; r < config.negatives_per_pair; ++r) {
        const auto pass = encoder::mine_triples(train, mix_seed(config.train.seed, kMiningStream + r), config.mining);
        out.insert(out.end(), pass.begin(), pass.end());
    }
    return out;
}

std::vector<encoder::Triple> heldout_triples(const std::vector<Example>& heldout, const EncoderSection& config) {
    encoder::MiningOptions options = config.mining;
    options.sql_positives = false;
    return encoder::mine_triples(heldout, mix_seed(config.train.seed, kHeldoutStream), options);
}

std::vector<policy::SftExample> sft_examples(const std::vector<Example>& examples, const data::Catalog& catalog,
                                             const policy::TokenizerConfig& tokenizer) {
    std::vector<policy::SftExample> out;
    out.reserve(examples.size());
    for (const auto& e : examples) {
        out.push_back({policy::serialize_prompt(e.question, catalog.schema(e.db_id), e.lang, tokenizer),
                       policy::sft_target(e.gold_sql, tokenizer)});
    }
    return out;
}

GrpoPromptSet::GrpoPromptSet(const std::vector<Example>& examples, const data::Catalog& catalog,
                             const policy::TokenizerConfig& tokenizer) {
    std::map<std::string, std::string> english;
    for (const auto& e : examples) {
        if (e.lang == "en") english[e.id] = e.question;
    }
    prompts_.reserve(examples.size());
    for (const auto& e : examples) {
        auto en = english.find(e.id);
        if (en == english.end()) throw ValidationError("example " + e.id + " has no English question");
        const Schema& schema = catalog.schema(e.db_id);
        golds_.emplace_back(schema, catalog.state(e.db_id), e.gold_sql);
        prompts_.push_back({policy::serialize_prompt(e.question, schema, e.lang, tokenizer), e.question, en->second,
                            &golds_.back()});
    }
}

eval::Predictor greedy_predictor(const policy::Policy& policy, const data::Catalog& catalog) {
    return [&policy, &catalog](const Example& e) {
        const auto prompt = policy::serialize_prompt(e.question, catalog.schema(e.db_id), e.lang,
                                                     policy.config().tokenizer);
        return policy.greedy(prompt).text();
    };
}

std::map<std::string, eval::StateBank> state_banks(const data::Catalog& catalog, const eval::EvalOptions& options) {
    std::map<std::string, eval::StateBank> banks;
    for (const auto& [db, schema] : catalog.schemas) banks.emplace(db, eval::StateBank(schema, catalog.state(db), options));
    return banks;
}

std::string question_mode_note() {
    return "sem_mode=question: the semantic reward compares the question with its English reference, which is "
           "constant within every group, so group-standardized advantages equal those of the no-contrastive arm "
           "and the contrastive term cannot change training";
}

} // namespace sqlgrpo::cli
