// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/data/example.hpp"
#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/state.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sqlgrpo::eval {

struct EvalOptions {
    std::size_t states = 5;  // K, canonical state included
    std::uint64_t seed = 1;
    std::size_t state_size = 6;  // size_hint for random states
    /// Seeds tried past the first before giving up on a gold query.
    std::size_t max_regenerations = 200;
};

nlohmann::json to_json(const EvalOptions& o);

/// 1 iff the SQL parses and executes without error on the state.
bool executes(const std::string& sql, const Schema& schema, const DatabaseState& state);

/// Lazily generated random states for one schema, indexed by seed offset,
/// so that every query evaluated against the bank sees the same states.
class StateBank {
public:
    StateBank(const Schema& schema, DatabaseState canonical, EvalOptions options);

    const Schema& schema() const { return *schema_; }
    const DatabaseState& canonical() const { return canonical_; }

    /// K states for a gold query: the canonical state, then random states
    /// with seeds seed+1, seed+2, ..., skipping any on which the gold query
    /// fails. Throws ValidationError if the gold query fails on the canonical
    /// state or too many random states are rejected.
    std::vector<const DatabaseState*> states_for(const std::string& gold_sql);

private:
    const DatabaseState& random_state(std::size_t offset);

    const Schema* schema_;
    DatabaseState canonical_;
    EvalOptions options_;
    std::map<std::size_t, DatabaseState> random_;
};

/// True iff the candidate executes on every state and its result equals the
/// gold result on every state.
bool sem_equivalent(const std::string& candidate, const std::string& gold_sql, const Schema& schema,
                    const std::vector<const DatabaseState*>& states);
bool sem_equivalent(const std::string& candidate, const std::string& gold_sql, StateBank& bank);

struct ExampleResult {
    std::string id;
    std::string db_id;
    std::string lang;
    std::string prediction;
    bool executes = false;
    bool sem_equivalent = false;
};

struct LanguageScore {
    std::string lang;
    std::size_t count = 0;
    double exec_acc = 0.0;  // percent
    double sem_acc = 0.0;   // percent
};

struct EvalReport {
    std::string arm;
    std::vector<LanguageScore> languages;  // report language order
    nlohmann::json fingerprint = nlohmann::json::object();
    std::vector<std::string> notes;
    std::vector<ExampleResult> examples;

    /// Arithmetic mean over language rows.
    LanguageScore average() const;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

using Predictor = std::function<std::string(const Example&)>;

/// Runs `predict` on every example and scores it on its schema's bank.
/// Throws ValidationError for an example whose db has no bank.
EvalReport evaluate(const std::string& arm, const std::vector<Example>& examples, const Predictor& predict,
                    std::map<std::string, StateBank>& banks);

/// Percentage of predictions that execute on the canonical state.
double exec_acc(const std::vector<Example>& examples, const Predictor& predict, std::map<std::string, StateBank>& banks);

/// Languages x arms grid of "Exec / Sem" with an averages row. With exactly
/// two arms a delta SemAcc column (second minus first) is appended. Notes of
/// every run are listed below the table.
std::string render_markdown(const std::vector<EvalReport>& runs);

} // namespace sqlgrpo::eval
