// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/data/dataset.hpp"

#include "sqlgrpo/exec/executor.hpp"
#include "sqlgrpo/sql/parser.hpp"
#include "sqlgrpo/sql/resolve.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

namespace sqlgrpo::data {

namespace {

constexpr std::string_view kSchemaSuffix = ".schema.json";
constexpr std::size_t kMaxShown = 20;

std::string join_diagnostics(const std::vector<std::string>& d) {
    std::string msg = std::to_string(d.size()) + " dataset error(s)";
    for (std::size_t i = 0; i < d.size() && i < kMaxShown; ++i) msg += "\n  " + d[i];
    if (d.size() > kMaxShown) msg += "\n  ...";
    return msg;
}

std::size_t language_rank(const std::string& lang) {
    return static_cast<std::size_t>(std::find(kLanguages.begin(), kLanguages.end(), lang) - kLanguages.begin());
}

} // namespace

IngestError::IngestError(std::vector<std::string> diagnostics)
    : ValidationError(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

Catalog Catalog::load(const std::string& dir) {
    Catalog c;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > kSchemaSuffix.size() && name.ends_with(kSchemaSuffix)) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Schema s = load_schema(f.string());
        const std::string base = f.string().substr(0, f.string().size() - kSchemaSuffix.size());
        const std::string state_path = base + ".state.json";
        if (!std::filesystem::exists(state_path)) {
            throw ValidationError("schema " + s.db_id + " has no canonical state file " + state_path);
        }
        DatabaseState st = load_state(state_path, s);
        const std::string id = s.db_id;
        c.states.emplace(id, std::move(st));
        c.schemas.emplace(id, std::move(s));
    }
    return c;
}

const Schema& Catalog::schema(const std::string& db_id) const {
    auto it = schemas.find(db_id);
    if (it == schemas.end()) throw ValidationError("no schema for db " + db_id);
    return it->second;
}

const DatabaseState& Catalog::state(const std::string& db_id) const {
    auto it = states.find(db_id);
    if (it == states.end()) throw ValidationError("no canonical state for db " + db_id);
    return it->second;
}

Dataset ingest_lines(const std::vector<std::string>& lines, const Catalog& catalog, const std::string& split) {
    if (split != "train" && split != "dev") throw ValidationError("split must be train or dev, got " + split);
    std::vector<std::string> diag;
    auto fail = [&](std::size_t line, const std::string& msg) {
        diag.push_back("line " + std::to_string(line) + ": " + msg);
    };
    struct Seen {
        std::string db_id;
        std::string gold;
        std::size_t line;
    };
    std::map<std::string, Seen> by_id;
    std::map<std::pair<std::string, std::string>, std::size_t> keys;
    Dataset out;
    out.split = split;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (lines[i].find_first_not_of(" \t\r\n") == std::string::npos) continue;
        Example e;
        try {
            const auto j = nlohmann::json::parse(lines[i]);
            for (const char* field : {"id", "db_id", "lang", "question", "gold_sql"}) {
                if (!j.contains(field) || !j.at(field).is_string()) {
                    throw FormatError(std::string("missing or non-string field '") + field + "'");
                }
            }
            e = {j.at("id"), j.at("db_id"), j.at("lang"), j.at("question"), j.at("gold_sql")};
        } catch (const nlohmann::json::exception& ex) {
            fail(ln, std::string("invalid JSON: ") + ex.what());
            continue;
        } catch (const FormatError& ex) {
            fail(ln, ex.what());
            continue;
        }
        if (e.id.empty()) {
            fail(ln, "empty id");
            continue;
        }
        if (!is_language(e.lang)) {
            fail(ln, "unknown language '" + e.lang + "'");
            continue;
        }
        auto schema_it = catalog.schemas.find(e.db_id);
        auto state_it = catalog.states.find(e.db_id);
        if (schema_it == catalog.schemas.end() || state_it == catalog.states.end()) {
            fail(ln, "no schema for db '" + e.db_id + "'");
            continue;
        }
        try {
            const sql::Select resolved = sql::resolve(sql::parse(e.gold_sql), schema_it->second);
            exec::execute(resolved, schema_it->second, state_it->second);
            e.gold_sql = sql::render(resolved);
        } catch (const Error& ex) {
            fail(ln, "bad gold SQL '" + e.gold_sql + "': " + ex.what());
            continue;
        }
        const auto [kit, fresh] = keys.emplace(std::make_pair(e.id, e.lang), ln);
        if (!fresh) {
            fail(ln, "duplicate (id, lang) = (" + e.id + ", " + e.lang + "), first on line " +
                         std::to_string(kit->second));
            continue;
        }
        const auto [sit, first] = by_id.emplace(e.id, Seen{e.db_id, e.gold_sql, ln});
        if (!first) {
            if (sit->second.db_id != e.db_id) {
                fail(ln, "id " + e.id + " has db " + e.db_id + " but db " + sit->second.db_id + " on line " +
                             std::to_string(sit->second.line));
                continue;
            }
            if (sit->second.gold != e.gold_sql) {
                fail(ln, "id " + e.id + " has a different gold query than on line " + std::to_string(sit->second.line));
                continue;
            }
        }
        out.examples.push_back(std::move(e));
    }
    if (!diag.empty()) throw IngestError(std::move(diag));
    std::sort(out.examples.begin(), out.examples.end(), [](const Example& a, const Example& b) {
        if (a.id != b.id) return a.id < b.id;
        return language_rank(a.lang) < language_rank(b.lang);
    });
    return out;
}

Dataset ingest(const std::string& path, const Catalog& catalog, const std::string& split) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    return ingest_lines(lines, catalog, split);
}

nlohmann::json example_to_json(const Example& e) {
    return {{"id", e.id}, {"db_id", e.db_id}, {"lang", e.lang}, {"question", e.question}, {"gold_sql", e.gold_sql}};
}

void write_jsonl(const std::vector<Example>& examples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (const auto& e : examples) out << example_to_json(e).dump() << "\n";
    if (!out) throw Error("cannot write " + path);
}

} // namespace sqlgrpo::data
