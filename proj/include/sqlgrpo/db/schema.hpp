// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/db/value.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgrpo {

struct Column {
    std::string name;
    ColumnType type = ColumnType::Int;
};

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::string> primary_key;

    /// Case-insensitive lookup.
    std::optional<std::size_t> column_index(std::string_view column) const;
    bool in_primary_key(std::string_view column) const;
};

struct ForeignKey {
    std::string child_table;
    std::string child_column;
    std::string parent_table;
    std::string parent_column;
};

/// Relational catalog. Names are matched case-insensitively.
struct Schema {
    std::string db_id;
    std::vector<Table> tables;
    std::vector<ForeignKey> foreign_keys;

    const Table* find_table(std::string_view name) const;
    std::optional<std::size_t> table_index(std::string_view name) const;

    /// Throws IntegrityError on duplicate names, dangling foreign keys, or
    /// type-mismatched foreign key endpoints.
    void validate() const;
};

/// Parses and validates. Throws FormatError or IntegrityError.
Schema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const Schema& schema);
Schema load_schema(const std::string& path);
void save_schema(const Schema& schema, const std::string& path);

} // namespace sqlgrpo
