// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/state.hpp"
#include "sqlgrpo/encoder/encoder.hpp"
#include "sqlgrpo/exec/executor.hpp"
#include "sqlgrpo/sql/ast.hpp"
#include "sqlgrpo/sql/resolve.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace sqlgrpo::reward {

struct RewardWeights {
    double exec = 1.0;
    double syntax = 0.5;
    double schema = 0.5;
    double sem = 0.2;

    /// Throws ValidationError on a negative or non-finite weight.
    void validate() const;
};

struct RewardBundle {
    double r_exec = 0.0;
    double r_syntax = 0.0;
    double r_schema = 0.0;
    double r_sem = 0.0;
    double r_total = 0.0;
    std::optional<std::string> error;
};

nlohmann::json to_json(const RewardBundle& b);

/// question: cosine between the question and the English reference question.
/// sql: cosine between the question and the candidate's canonical SQL text.
enum class SemMode { Question, Sql };
SemMode sem_mode_from_string(const std::string& s);
const char* to_string(SemMode m);

/// A candidate string after one parse attempt.
struct Candidate {
    std::string text;
    std::optional<sql::Select> ast;
    std::string parse_error;
};
Candidate parse_candidate(const std::string& text);

/// Everything about the gold side that every candidate is scored against.
/// Throws ValidationError if the gold query does not parse, resolve or
/// execute on the state.
class GoldContext {
public:
    GoldContext(const Schema& schema, const DatabaseState& state, const std::string& gold_sql);

    const Schema& schema() const { return *schema_; }
    const DatabaseState& state() const { return *state_; }
    const sql::Select& gold() const { return gold_; }
    const exec::ResultTable& gold_result() const { return gold_result_; }
    const sql::SchemaRefs& gold_refs() const { return gold_refs_; }

private:
    const Schema* schema_;
    const DatabaseState* state_;
    sql::Select gold_;
    exec::ResultTable gold_result_;
    sql::SchemaRefs gold_refs_;
};

/// 1 iff the candidate parses and executes without error.
double syntax_reward(const Candidate& c, const Schema& schema, const DatabaseState& state,
                     std::string* error = nullptr);
/// 1 iff the candidate executes and its result equals the gold result.
double exec_reward(const Candidate& c, const GoldContext& gold, std::string* error = nullptr);
/// F1 between the candidate's valid references and the gold references,
/// times the fraction of the candidate's references that are valid. 0 for
/// an unparseable candidate or an ambiguous column reference.
double schema_reward(const Candidate& c, const sql::SchemaRefs& gold_refs, const Schema& schema);

/// Text the sql mode embeds for a candidate: canonical form when it resolves,
/// plain rendering when it only parses, the trimmed raw text otherwise.
std::string semantic_text(const Candidate& c, const Schema& schema);
double semantic_reward(const encoder::Encoder& enc, const std::string& question, const std::string& reference_question,
                       SemMode mode, const Candidate& c, const Schema& schema);

double combine(const RewardBundle& b, const RewardWeights& w);

/// All four signals for one candidate. `r_sem` is supplied by the caller so
/// embeddings can be cached; it is ignored (set to 0) when w.sem == 0.
RewardBundle score(const Candidate& c, const GoldContext& gold, double r_sem, const RewardWeights& w);

} // namespace sqlgrpo::reward
