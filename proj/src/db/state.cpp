// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/db/state.hpp"

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/common/text.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace sqlgrpo {

const std::vector<Row>& DatabaseState::table_rows(const std::string& table) const {
    static const std::vector<Row> empty;
    if (auto it = rows.find(table); it != rows.end()) {
        return it->second;
    }
    for (const auto& [name, r] : rows) {
        if (iequals(name, table)) {
            return r;
        }
    }
    return empty;
}

namespace {

struct RowKeyLess {
    bool operator()(const Row& a, const Row& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const Value& x, const Value& y) { return compare_values(x, y) < 0; });
    }
};

} // namespace

std::vector<Violation> validate_state(const Schema& schema, const DatabaseState& state) {
    std::vector<Violation> out;
    if (state.schema_id != schema.db_id) {
        out.push_back({Violation::Kind::SchemaMismatch, "", 0,
                       "state is for '" + state.schema_id + "', schema is '" + schema.db_id + "'"});
    }
    for (const auto& [name, rows] : state.rows) {
        if (!schema.find_table(name)) {
            out.push_back({Violation::Kind::UnknownTable, name, 0, "table '" + name + "' not in schema"});
        }
    }
    for (const auto& table : schema.tables) {
        const auto& rows = state.table_rows(table.name);
        std::vector<std::size_t> pk_idx;
        for (const auto& k : table.primary_key) {
            pk_idx.push_back(*table.column_index(k));
        }
        std::set<Row, RowKeyLess> seen_keys;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Row& row = rows[r];
            if (row.size() != table.columns.size()) {
                out.push_back({Violation::Kind::Arity, table.name, r,
                               "row has " + std::to_string(row.size()) + " values, table has " +
                                   std::to_string(table.columns.size()) + " columns"});
                continue;
            }
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (!matches_type(row[c], table.columns[c].type)) {
                    out.push_back({Violation::Kind::Type, table.name, r,
                                   "column '" + table.columns[c].name + "' expects " +
                                       to_string(table.columns[c].type) + ", got " + row[c].debug_string()});
                }
            }
            if (pk_idx.empty()) {
                continue;
            }
            Row key;
            bool has_null = false;
            for (auto i : pk_idx) {
                has_null = has_null || row[i].is_null();
                key.push_back(row[i]);
            }
            if (has_null) {
                out.push_back({Violation::Kind::PrimaryKeyNull, table.name, r, "primary key contains NULL"});
            } else if (!seen_keys.insert(key).second) {
                out.push_back({Violation::Kind::PrimaryKeyDuplicate, table.name, r, "duplicate primary key"});
            }
        }
    }
    for (const auto& fk : schema.foreign_keys) {
        const Table* child = schema.find_table(fk.child_table);
        const Table* parent = schema.find_table(fk.parent_table);
        const auto ci = *child->column_index(fk.child_column);
        const auto pi = *parent->column_index(fk.parent_column);
        std::vector<Value> parent_values;
        for (const auto& row : state.table_rows(parent->name)) {
            if (row.size() == parent->columns.size()) {
                parent_values.push_back(row[pi]);
            }
        }
        const auto& rows = state.table_rows(child->name);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != child->columns.size() || rows[r][ci].is_null()) {
                continue;
            }
            const bool found = std::any_of(parent_values.begin(), parent_values.end(),
                                           [&](const Value& v) { return !v.is_null() && v == rows[r][ci]; });
            if (!found) {
                out.push_back({Violation::Kind::ForeignKeyDangling, child->name, r,
                               fk.child_table + "." + fk.child_column + " = " + rows[r][ci].debug_string() +
                                   " has no parent in " + fk.parent_table + "." + fk.parent_column});
            }
        }
    }
    return out;
}

namespace {

constexpr std::array<const char*, 24> kWords = {
    "amber", "basil", "cedar", "delta", "ember", "fjord", "grove", "hazel", "iris",  "jade",  "kite",  "lumen",
    "moss",  "nova",  "onyx",  "pearl", "quill", "reed",  "sage",  "tide",  "umber", "vale",  "wren",  "yarrow"};

std::vector<Value> column_pool(ColumnType type, std::size_t n) {
    std::vector<Value> pool;
    switch (type) {
    case ColumnType::Int:
        for (std::size_t i = 1; i <= 2 * n; ++i) {
            pool.push_back(Value::integer(static_cast<std::int64_t>(i)));
        }
        break;
    case ColumnType::Real:
        for (std::size_t i = 1; i <= 2 * n; ++i) {
            pool.push_back(Value::real(0.5 * static_cast<double>(i)));
        }
        break;
    case ColumnType::Text:
        for (std::size_t i = 0; i < n; ++i) {
            std::string w = kWords[i % kWords.size()];
            if (i >= kWords.size()) {
                w += std::to_string(i / kWords.size());
            }
            pool.push_back(Value::text(std::move(w)));
        }
        break;
    }
    return pool;
}

/// Parents before children; self references are allowed.
std::vector<std::size_t> creation_order(const Schema& schema) {
    const std::size_t n = schema.tables.size();
    std::vector<std::set<std::size_t>> deps(n);
    for (const auto& fk : schema.foreign_keys) {
        const auto c = *schema.table_index(fk.child_table);
        const auto p = *schema.table_index(fk.parent_table);
        if (c != p) {
            deps[c].insert(p);
        }
    }
    std::vector<std::size_t> order;
    std::vector<bool> done(n, false);
    while (order.size() < n) {
        bool progressed = false;
        for (std::size_t t = 0; t < n; ++t) {
            if (done[t]) {
                continue;
            }
            if (std::all_of(deps[t].begin(), deps[t].end(), [&](std::size_t d) { return done[d]; })) {
                done[t] = true;
                order.push_back(t);
                progressed = true;
            }
        }
        if (!progressed) {
            throw ConstraintError("foreign keys form a cycle; cannot order table generation");
        }
    }
    return order;
}

} // namespace

DatabaseState generate_random_state(const Schema& schema, std::uint64_t seed, std::size_t size_hint,
                                    const StateGenOptions& options) {
    if (size_hint == 0) {
        throw ConstraintError("size_hint must be at least 1");
    }
    DatabaseState state;
    state.schema_id = schema.db_id;
    state.seed = seed;
    for (const auto& t : schema.tables) {
        state.rows[t.name];
    }

    for (const auto ti : creation_order(schema)) {
        const Table& table = schema.tables[ti];
        Rng rng(mix_seed(seed, ti));
        std::vector<Row>& rows = state.rows[table.name];

        // Per-column pools; FK columns draw from the parent's current values.
        std::vector<std::vector<Value>> pools(table.columns.size());
        std::vector<bool> self_ref(table.columns.size(), false);
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            pools[c] = column_pool(table.columns[c].type, size_hint);
            for (const auto& fk : schema.foreign_keys) {
                if (!iequals(fk.child_table, table.name) || !iequals(fk.child_column, table.columns[c].name)) {
                    continue;
                }
                if (iequals(fk.parent_table, table.name)) {
                    self_ref[c] = true;
                    continue;
                }
                const Table* parent = schema.find_table(fk.parent_table);
                const auto pi = *parent->column_index(fk.parent_column);
                std::vector<Value> values;
                for (const auto& prow : state.rows[parent->name]) {
                    if (!prow[pi].is_null() &&
                        std::find(values.begin(), values.end(), prow[pi]) == values.end()) {
                        values.push_back(prow[pi]);
                    }
                }
                pools[c] = std::move(values);
            }
        }

        std::vector<std::size_t> pk_idx;
        for (const auto& k : table.primary_key) {
            pk_idx.push_back(*table.column_index(k));
        }
        if (!pk_idx.empty()) {
            double capacity = 1.0;
            for (auto i : pk_idx) {
                if (self_ref[i]) {
                    throw ConstraintError("self-referencing key column in primary key of '" + table.name + "'");
                }
                capacity *= static_cast<double>(pools[i].size());
            }
            if (capacity < static_cast<double>(size_hint)) {
                throw ConstraintError("primary key of '" + table.name + "' admits only " +
                                      std::to_string(static_cast<long long>(capacity)) + " distinct values, need " +
                                      std::to_string(size_hint));
            }
        }

        std::set<Row, RowKeyLess> used_keys;
        std::size_t attempts = 0;
        const std::size_t max_attempts = 1000 * size_hint + 1000;
        while (rows.size() < size_hint) {
            if (++attempts > max_attempts) {
                throw ConstraintError("could not find unique primary keys for '" + table.name + "'");
            }
            if (pk_idx.empty() && !rows.empty() && rng.bernoulli(options.repeat_fraction)) {
                rows.push_back(rows[rng.index(rows.size())]);
                continue;
            }
            Row row(table.columns.size());
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                const bool in_pk = table.in_primary_key(table.columns[c].name);
                if (self_ref[c]) {
                    // Earlier rows of this table are the only legal parents.
                    row[c] = Value::null();
                    if (!rows.empty() && !rng.bernoulli(options.null_fraction)) {
                        for (const auto& fk : schema.foreign_keys) {
                            if (iequals(fk.child_table, table.name) && iequals(fk.child_column, table.columns[c].name)) {
                                const auto pi = *table.column_index(fk.parent_column);
                                row[c] = rows[rng.index(rows.size())][pi];
                            }
                        }
                    }
                    continue;
                }
                if (!in_pk && (pools[c].empty() || rng.bernoulli(options.null_fraction))) {
                    row[c] = Value::null();
                    continue;
                }
                row[c] = pools[c][rng.index(pools[c].size())];
            }
            if (!pk_idx.empty()) {
                Row key;
                for (auto i : pk_idx) {
                    key.push_back(row[i]);
                }
                if (!used_keys.insert(key).second) {
                    continue;
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return state;
}

DatabaseState state_from_json(const nlohmann::json& j, const Schema& schema) {
    DatabaseState state;
    try {
        state.schema_id = j.at("schema_id").get<std::string>();
        if (j.contains("seed") && !j.at("seed").is_null()) {
            state.seed = j.at("seed").get<std::uint64_t>();
        }
        for (const auto& [name, jrows] : j.at("rows").items()) {
            const Table* table = schema.find_table(name);
            auto& rows = state.rows[table ? table->name : name];
            for (const auto& jrow : jrows) {
                Row row;
                std::size_t c = 0;
                for (const auto& jv : jrow) {
                    const ColumnType type =
                        (table && c < table->columns.size()) ? table->columns[c].type : ColumnType::Text;
                    row.push_back(value_from_json(jv, type));
                    ++c;
                }
                rows.push_back(std::move(row));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed state: ") + e.what());
    }
    return state;
}

nlohmann::json state_to_json(const DatabaseState& state) {
    nlohmann::json j;
    j["schema_id"] = state.schema_id;
    if (state.seed) {
        j["seed"] = *state.seed;
    }
    j["rows"] = nlohmann::json::object();
    for (const auto& [name, rows] : state.rows) {
        auto& jrows = j["rows"][name];
        jrows = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json jrow = nlohmann::json::array();
            for (const auto& v : row) {
                jrow.push_back(value_to_json(v));
            }
            jrows.push_back(std::move(jrow));
        }
    }
    return j;
}

DatabaseState load_state(const std::string& path, const Schema& schema) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    return state_from_json(j, schema);
}

void save_state(const DatabaseState& state, const std::string& path) {
    write_file(path, state_to_json(state).dump() + "\n");
}

} // namespace sqlgrpo
