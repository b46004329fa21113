// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/reward/reward.hpp"

#include "sqlgrpo/common/text.hpp"
#include "sqlgrpo/sql/parser.hpp"

#include <cmath>

namespace sqlgrpo::reward {

void RewardWeights::validate() const {
    for (double w : {exec, syntax, schema, sem}) {
        if (!std::isfinite(w) || w < 0.0) {
            throw ValidationError("reward weights must be finite and non-negative");
        }
    }
}

nlohmann::json to_json(const RewardBundle& b) {
    nlohmann::json j = {{"r_exec", b.r_exec},     {"r_syntax", b.r_syntax}, {"r_schema", b.r_schema},
                        {"r_sem", b.r_sem},       {"r_total", b.r_total}};
    j["error"] = b.error ? nlohmann::json(*b.error) : nlohmann::json(nullptr);
    return j;
}

SemMode sem_mode_from_string(const std::string& s) {
    if (s == "question") return SemMode::Question;
    if (s == "sql") return SemMode::Sql;
    throw ValidationError("sem_mode must be 'question' or 'sql', got '" + s + "'");
}

const char* to_string(SemMode m) { return m == SemMode::Question ? "question" : "sql"; }

Candidate parse_candidate(const std::string& text) {
    Candidate c;
    c.text = text;
    try {
        c.ast = sql::parse(text);
    } catch (const Error& e) {
        c.parse_error = e.what();
    }
    return c;
}

GoldContext::GoldContext(const Schema& schema, const DatabaseState& state, const std::string& gold_sql)
    : schema_(&schema), state_(&state) {
    try {
        gold_ = sql::resolve(sql::parse(gold_sql), schema);
        gold_result_ = exec::execute(gold_, schema, state);
        gold_refs_ = sql::extract_refs(gold_, schema);
    } catch (const Error& e) {
        throw ValidationError("gold query '" + gold_sql + "' is unusable: " + e.what());
    }
}

namespace {

/// Executes a parsed candidate; nullopt (and `error`) on failure.
std::optional<exec::ResultTable> try_execute(const Candidate& c, const Schema& schema, const DatabaseState& state,
                                             std::string* error) {
    if (!c.ast) {
        if (error) *error = "parse error: " + c.parse_error;
        return std::nullopt;
    }
    try {
        return exec::execute(*c.ast, schema, state);
    } catch (const Error& e) {
        if (error) *error = std::string("execution error: ") + e.what();
        return std::nullopt;
    }
}

} // namespace

double syntax_reward(const Candidate& c, const Schema& schema, const DatabaseState& state, std::string* error) {
    return try_execute(c, schema, state, error) ? 1.0 : 0.0;
}

double exec_reward(const Candidate& c, const GoldContext& gold, std::string* error) {
    const auto result = try_execute(c, gold.schema(), gold.state(), error);
    return result && exec::compare_results(*result, gold.gold_result()) ? 1.0 : 0.0;
}

double schema_reward(const Candidate& c, const sql::SchemaRefs& gold_refs, const Schema& schema) {
    if (!c.ast) {
        return 0.0;
    }
    sql::SchemaRefs refs;
    try {
        refs = sql::extract_refs(*c.ast, schema);
    } catch (const sql::AmbiguityError&) {
        return 0.0;
    }
    const std::size_t valid = refs.valid_count();
    const std::size_t invalid = refs.invalid.size();
    const double validity = valid + invalid == 0 ? 1.0 : static_cast<double>(valid) / static_cast<double>(valid + invalid);
    if (valid == 0) {
        return 0.0;
    }
    std::size_t common = 0;
    for (const auto& t : refs.tables) common += gold_refs.tables.count(t);
    for (const auto& col : refs.columns) common += gold_refs.columns.count(col);
    const double f1 = 2.0 * static_cast<double>(common) / static_cast<double>(valid + gold_refs.valid_count());
    return f1 * validity;
}

std::string semantic_text(const Candidate& c, const Schema& schema) {
    if (c.ast) {
        try {
            return sql::render(sql::resolve(*c.ast, schema));
        } catch (const Error&) {
            return sql::render(*c.ast);
        }
    }
    return trim(c.text);
}

double semantic_reward(const encoder::Encoder& enc, const std::string& question, const std::string& reference_question,
                       SemMode mode, const Candidate& c, const Schema& schema) {
    const auto q = enc.embed(question);
    if (mode == SemMode::Question) {
        return encoder::cosine(q, enc.embed(reference_question));
    }
    const std::string text = semantic_text(c, schema);
    if (trim(text).empty()) {
        return 0.0;
    }
    return encoder::cosine(q, enc.embed(text));
}

double combine(const RewardBundle& b, const RewardWeights& w) {
    return w.exec * b.r_exec + w.syntax * b.r_syntax + w.schema * b.r_schema + w.sem * b.r_sem;
}

RewardBundle score(const Candidate& c, const GoldContext& gold, double r_sem, const RewardWeights& w) {
    RewardBundle b;
    std::string error;
    const auto result = try_execute(c, gold.schema(), gold.state(), &error);
    b.r_syntax = result ? 1.0 : 0.0;
    b.r_exec = result && exec::compare_results(*result, gold.gold_result()) ? 1.0 : 0.0;
    if (!result) {
        b.error = error;
    }
    b.r_schema = schema_reward(c, gold.gold_refs(), gold.schema());
    b.r_sem = w.sem == 0.0 ? 0.0 : r_sem;
    b.r_total = combine(b, w);
    return b;
}

} // namespace sqlgrpo::reward
