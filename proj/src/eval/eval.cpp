// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/eval/eval.hpp"

#include "sqlgrpo/exec/executor.hpp"
#include "sqlgrpo/sql/parser.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>

namespace sqlgrpo::eval {

namespace {

std::optional<exec::ResultTable> run(const std::string& sql, const Schema& schema, const DatabaseState& state) {
    try {
        return exec::execute(sql::parse(sql), schema, state);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string signed_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f", v);
    return buf;
}

} // namespace

nlohmann::json to_json(const EvalOptions& o) {
    return {{"states", o.states}, {"seed", o.seed}, {"state_size", o.state_size},
            {"max_regenerations", o.max_regenerations}};
}

bool executes(const std::string& sql, const Schema& schema, const DatabaseState& state) {
    return run(sql, schema, state).has_value();
}

StateBank::StateBank(const Schema& schema, DatabaseState canonical, EvalOptions options)
    : schema_(&schema), canonical_(std::move(canonical)), options_(options) {
    if (options_.states == 0) throw ValidationError("evaluation needs at least one state");
}

const DatabaseState& StateBank::random_state(std::size_t offset) {
    auto it = random_.find(offset);
    if (it == random_.end()) {
        it = random_.emplace(offset, generate_random_state(*schema_, options_.seed + offset, options_.state_size)).first;
    }
    return it->second;
}

std::vector<const DatabaseState*> StateBank::states_for(const std::string& gold_sql) {
    if (!executes(gold_sql, *schema_, canonical_)) {
        throw ValidationError("gold query fails on the canonical state of " + schema_->db_id + ": " + gold_sql);
    }
    std::vector<const DatabaseState*> out = {&canonical_};
    std::size_t offset = 1;
    while (out.size() < options_.states) {
        if (offset > options_.states + options_.max_regenerations) {
            throw ValidationError("gold query fails on too many random states of " + schema_->db_id + ": " + gold_sql);
        }
        const DatabaseState& s = random_state(offset++);
        if (executes(gold_sql, *schema_, s)) out.push_back(&s);
    }
    return out;
}

bool sem_equivalent(const std::string& candidate, const std::string& gold_sql, const Schema& schema,
                    const std::vector<const DatabaseState*>& states) {
    for (const DatabaseState* s : states) {
        const auto c = run(candidate, schema, *s);
        if (!c) return false;
        const auto g = run(gold_sql, schema, *s);
        if (!g) {
            throw ValidationError("gold query fails on an evaluation state: " + gold_sql);
        }
        if (!exec::compare_results(*c, *g)) return false;
    }
    return true;
}

bool sem_equivalent(const std::string& candidate, const std::string& gold_sql, StateBank& bank) {
    return sem_equivalent(candidate, gold_sql, bank.schema(), bank.states_for(gold_sql));
}

LanguageScore EvalReport::average() const {
    LanguageScore avg;
    avg.lang = "avg";
    for (const auto& l : languages) {
        avg.count += l.count;
        avg.exec_acc += l.exec_acc;
        avg.sem_acc += l.sem_acc;
    }
    if (!languages.empty()) {
        avg.exec_acc /= static_cast<double>(languages.size());
        avg.sem_acc /= static_cast<double>(languages.size());
    }
    return avg;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json langs = nlohmann::json::array();
    for (const auto& l : r.languages) {
        langs.push_back({{"lang", l.lang}, {"count", l.count}, {"exec_acc", l.exec_acc}, {"sem_acc", l.sem_acc}});
    }
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : r.examples) {
        ex.push_back({{"id", e.id},
                      {"db_id", e.db_id},
                      {"lang", e.lang},
                      {"prediction", e.prediction},
                      {"executes", e.executes},
                      {"sem_equivalent", e.sem_equivalent}});
    }
    const LanguageScore avg = r.average();
    return {{"arm", r.arm},
            {"languages", langs},
            {"average", {{"count", avg.count}, {"exec_acc", avg.exec_acc}, {"sem_acc", avg.sem_acc}}},
            {"fingerprint", r.fingerprint},
            {"notes", r.notes},
            {"examples", ex}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    try {
        r.arm = j.at("arm").get<std::string>();
        for (const auto& l : j.at("languages")) {
            r.languages.push_back({l.at("lang").get<std::string>(), l.at("count").get<std::size_t>(),
                                   l.at("exec_acc").get<double>(), l.at("sem_acc").get<double>()});
        }
        r.fingerprint = j.value("fingerprint", nlohmann::json::object());
        r.notes = j.value("notes", std::vector<std::string>{});
        for (const auto& e : j.value("examples", nlohmann::json::array())) {
            r.examples.push_back({e.at("id").get<std::string>(), e.at("db_id").get<std::string>(),
                                  e.at("lang").get<std::string>(), e.at("prediction").get<std::string>(),
                                  e.at("executes").get<bool>(), e.at("sem_equivalent").get<bool>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad eval report: ") + e.what());
    }
    return r;
}

EvalReport evaluate(const std::string& arm, const std::vector<Example>& examples, const Predictor& predict,
                    std::map<std::string, StateBank>& banks) {
    EvalReport r;
    r.arm = arm;
    std::map<std::string, LanguageScore> by_lang;
    for (const auto& ex : examples) {
        auto it = banks.find(ex.db_id);
        if (it == banks.end()) throw ValidationError("no database for example " + ex.id + " (db " + ex.db_id + ")");
        StateBank& bank = it->second;
        ExampleResult res{ex.id, ex.db_id, ex.lang, predict(ex), false, false};
        res.executes = executes(res.prediction, bank.schema(), bank.canonical());
        res.sem_equivalent = res.executes && sem_equivalent(res.prediction, ex.gold_sql, bank);
        LanguageScore& s = by_lang[ex.lang];
        s.lang = ex.lang;
        ++s.count;
        s.exec_acc += res.executes ? 1.0 : 0.0;
        s.sem_acc += res.sem_equivalent ? 1.0 : 0.0;
        r.examples.push_back(std::move(res));
    }
    auto push = [&](const std::string& lang) {
        auto it = by_lang.find(lang);
        if (it == by_lang.end()) return;
        LanguageScore s = it->second;
        s.exec_acc = 100.0 * s.exec_acc / static_cast<double>(s.count);
        s.sem_acc = 100.0 * s.sem_acc / static_cast<double>(s.count);
        r.languages.push_back(s);
        by_lang.erase(it);
    };
    for (auto lang : kLanguages) push(std::string(lang));
    while (!by_lang.empty()) push(by_lang.begin()->first);
    return r;
}

double exec_acc(const std::vector<Example>& examples, const Predictor& predict,
                std::map<std::string, StateBank>& banks) {
    if (examples.empty()) return 0.0;
    std::size_t ok = 0;
    for (const auto& ex : examples) {
        auto it = banks.find(ex.db_id);
        if (it == banks.end()) throw ValidationError("no database for example " + ex.id + " (db " + ex.db_id + ")");
        ok += executes(predict(ex), it->second.schema(), it->second.canonical()) ? 1 : 0;
    }
    return 100.0 * static_cast<double>(ok) / static_cast<double>(examples.size());
}

std::string render_markdown(const std::vector<EvalReport>& runs) {
    if (runs.empty()) throw ValidationError("a report needs at least one evaluation");
    std::vector<std::string> langs;
    for (auto lang : kLanguages) {
        for (const auto& r : runs) {
            if (std::any_of(r.languages.begin(), r.languages.end(), [&](const auto& l) { return l.lang == lang; })) {
                langs.emplace_back(lang);
                break;
            }
        }
    }
    std::set<std::string> extra;
    for (const auto& r : runs) {
        for (const auto& l : r.languages) {
            if (!is_language(l.lang)) extra.insert(l.lang);
        }
    }
    langs.insert(langs.end(), extra.begin(), extra.end());

    const bool delta = runs.size() == 2;
    auto find = [](const EvalReport& r, const std::string& lang) -> const LanguageScore* {
        for (const auto& l : r.languages) {
            if (l.lang == lang) return &l;
        }
        return nullptr;
    };
    std::string out = "| Language |";
    for (const auto& r : runs) out += " " + r.arm + " |";
    if (delta) out += " Δ SemAcc |";
    out += "\n|---|";
    for (std::size_t i = 0; i < runs.size(); ++i) out += "---|";
    if (delta) out += "---|";
    out += "\n";
    auto row = [&](const std::string& label, const std::vector<const LanguageScore*>& cells) {
        out += "| " + label + " |";
        for (const auto* c : cells) out += c ? " " + pct(c->exec_acc) + " / " + pct(c->sem_acc) + " |" : " - |";
        if (delta) out += cells[0] && cells[1] ? " " + signed_pct(cells[1]->sem_acc - cells[0]->sem_acc) + " |" : " - |";
        out += "\n";
    };
    for (const auto& lang : langs) {
        std::vector<const LanguageScore*> cells;
        for (const auto& r : runs) cells.push_back(find(r, lang));
        row(lang, cells);
    }
    std::vector<LanguageScore> avgs;
    for (const auto& r : runs) avgs.push_back(r.average());
    std::vector<const LanguageScore*> cells;
    for (const auto& a : avgs) cells.push_back(&a);
    row("Average", cells);
    out += "\nScores are ExecAcc / SemAcc (%).\n";
    for (const auto& r : runs) {
        for (const auto& n : r.notes) out += "\n> **" + r.arm + "**: " + n + "\n";
    }
    return out;
}

} // namespace sqlgrpo::eval
