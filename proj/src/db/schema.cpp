// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/db/schema.hpp"

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/common/text.hpp"

#include <set>

namespace sqlgrpo {

std::optional<std::size_t> Table::column_index(std::string_view column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (iequals(columns[i].name, column)) {
            return i;
        }
    }
    return std::nullopt;
}

bool Table::in_primary_key(std::string_view column) const {
    for (const auto& k : primary_key) {
        if (iequals(k, column)) {
            return true;
        }
    }
    return false;
}

const Table* Schema::find_table(std::string_view name) const {
    const auto idx = table_index(name);
    return idx ? &tables[*idx] : nullptr;
}

std::optional<std::size_t> Schema::table_index(std::string_view name) const {
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (iequals(tables[i].name, name)) {
            return i;
        }
    }
    return std::nullopt;
}

void Schema::validate() const {
    std::set<std::string> table_names;
    for (const auto& t : tables) {
        if (t.name.empty()) {
            throw IntegrityError("table with empty name");
        }
        if (!table_names.insert(to_lower(t.name)).second) {
            throw IntegrityError("duplicate table '" + t.name + "'");
        }
        std::set<std::string> column_names;
        for (const auto& c : t.columns) {
            if (c.name.empty()) {
                throw IntegrityError("column with empty name in '" + t.name + "'");
            }
            if (!column_names.insert(to_lower(c.name)).second) {
                throw IntegrityError("duplicate column '" + t.name + "." + c.name + "'");
            }
        }
        std::set<std::string> pk_names;
        for (const auto& k : t.primary_key) {
            if (!t.column_index(k)) {
                throw IntegrityError("primary key column '" + t.name + "." + k + "' does not exist");
            }
            if (!pk_names.insert(to_lower(k)).second) {
                throw IntegrityError("primary key of '" + t.name + "' repeats '" + k + "'");
            }
        }
    }
    for (const auto& fk : foreign_keys) {
        const auto endpoint = [&](const std::string& table, const std::string& column) -> const Column& {
            const Table* t = find_table(table);
            if (t == nullptr) {
                throw IntegrityError("foreign key references missing table '" + table + "'");
            }
            const auto idx = t->column_index(column);
            if (!idx) {
                throw IntegrityError("foreign key references missing column '" + table + "." + column + "'");
            }
            return t->columns[*idx];
        };
        const Column& child = endpoint(fk.child_table, fk.child_column);
        const Column& parent = endpoint(fk.parent_table, fk.parent_column);
        if (child.type != parent.type) {
            throw IntegrityError("foreign key " + fk.child_table + "." + fk.child_column + " -> " +
                                 fk.parent_table + "." + fk.parent_column + " joins different types");
        }
    }
}

namespace {

std::pair<std::string, std::string> split_qualified(const std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size()) {
        throw FormatError("expected table.column, got '" + s + "'");
    }
    return {s.substr(0, dot), s.substr(dot + 1)};
}

} // namespace

Schema schema_from_json(const nlohmann::json& j) {
    Schema schema;
    try {
        schema.db_id = j.at("db_id").get<std::string>();
        for (const auto& jt : j.at("tables")) {
            Table t;
            t.name = jt.at("name").get<std::string>();
            for (const auto& jc : jt.at("columns")) {
                t.columns.push_back({jc.at("name").get<std::string>(),
                                     column_type_from_string(jc.at("type").get<std::string>())});
            }
            if (jt.contains("primary_key")) {
                t.primary_key = jt.at("primary_key").get<std::vector<std::string>>();
            }
            schema.tables.push_back(std::move(t));
        }
        if (j.contains("foreign_keys")) {
            for (const auto& jf : j.at("foreign_keys")) {
                auto [ct, cc] = split_qualified(jf.at("from").get<std::string>());
                auto [pt, pc] = split_qualified(jf.at("to").get<std::string>());
                schema.foreign_keys.push_back({ct, cc, pt, pc});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed schema: ") + e.what());
    }
    schema.validate();
    return schema;
}

nlohmann::json schema_to_json(const Schema& schema) {
    nlohmann::json j;
    j["db_id"] = schema.db_id;
    j["tables"] = nlohmann::json::array();
    for (const auto& t : schema.tables) {
        nlohmann::json jt;
        jt["name"] = t.name;
        jt["columns"] = nlohmann::json::array();
        for (const auto& c : t.columns) {
            jt["columns"].push_back({{"name", c.name}, {"type", to_string(c.type)}});
        }
        jt["primary_key"] = t.primary_key;
        j["tables"].push_back(std::move(jt));
    }
    j["foreign_keys"] = nlohmann::json::array();
    for (const auto& fk : schema.foreign_keys) {
        j["foreign_keys"].push_back({{"from", fk.child_table + "." + fk.child_column},
                                     {"to", fk.parent_table + "." + fk.parent_column}});
    }
    return j;
}

Schema load_schema(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    return schema_from_json(j);
}

void save_schema(const Schema& schema, const std::string& path) {
    write_file(path, schema_to_json(schema).dump(2) + "\n");
}

} // namespace sqlgrpo
