// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/value.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sqlgrpo {

using Row = std::vector<Value>;

/// Concrete contents of every table of one schema. Keys are table names as
/// spelled in the schema.
struct DatabaseState {
    std::string schema_id;
    std::map<std::string, std::vector<Row>> rows;
    std::optional<std::uint64_t> seed;

    /// Case-insensitive lookup; an absent table reads as empty.
    const std::vector<Row>& table_rows(const std::string& table) const;
};

struct Violation {
    enum class Kind { SchemaMismatch, UnknownTable, Arity, Type, PrimaryKeyNull, PrimaryKeyDuplicate, ForeignKeyDangling };
    Kind kind;
    std::string table;
    std::size_t row = 0;
    std::string message;
};

/// Every violation found; empty means the state is valid.
std::vector<Violation> validate_state(const Schema& schema, const DatabaseState& state);

struct StateGenOptions {
    double null_fraction = 0.1;
    /// Probability that a row of a table without primary key copies an
    /// earlier row verbatim.
    double repeat_fraction = 0.3;
};

/// Seeded random state with deliberately small value pools so that duplicate
/// rows and group-size collisions are common. Throws ConstraintError when the
/// schema cannot be populated (FK cycles, primary key capacity below
/// size_hint).
DatabaseState generate_random_state(const Schema& schema, std::uint64_t seed, std::size_t size_hint,
                                    const StateGenOptions& options = {});

DatabaseState state_from_json(const nlohmann::json& j, const Schema& schema);
nlohmann::json state_to_json(const DatabaseState& state);
DatabaseState load_state(const std::string& path, const Schema& schema);
void save_state(const DatabaseState& state, const std::string& path);

} // namespace sqlgrpo
