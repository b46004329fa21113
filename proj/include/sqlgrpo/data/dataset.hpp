// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/data/example.hpp"
#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/state.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace sqlgrpo::data {

/// Schemas and canonical states by db_id. Map nodes are stable, so pointers
/// into a catalog stay valid while it lives.
struct Catalog {
    std::map<std::string, Schema> schemas;
    std::map<std::string, DatabaseState> states;

    /// Every <db>.schema.json in `dir` with its <db>.state.json. Throws
    /// ValidationError when a state file is missing.
    static Catalog load(const std::string& dir);

    const Schema& schema(const std::string& db_id) const;
    const DatabaseState& state(const std::string& db_id) const;
};

struct Dataset {
    std::string split;  // "train" or "dev"
    std::vector<Example> examples;
};

/// All problems found in one file, one "line N: ..." entry each.
class IngestError : public ValidationError {
public:
    explicit IngestError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// Validates JSON-lines examples: required fields, known language, known
/// db_id, gold SQL that parses and executes on the canonical state, unique
/// (id, lang), and one db_id and one gold query per id. Blank lines are
/// skipped. The result holds canonical gold SQL sorted by (id, report
/// language order), so it is independent of line order and ingesting its
/// own output reproduces it.
Dataset ingest_lines(const std::vector<std::string>& lines, const Catalog& catalog, const std::string& split);
Dataset ingest(const std::string& path, const Catalog& catalog, const std::string& split);

nlohmann::json example_to_json(const Example& e);
void write_jsonl(const std::vector<Example>& examples, const std::string& path);

} // namespace sqlgrpo::data
