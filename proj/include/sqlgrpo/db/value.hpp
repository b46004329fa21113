// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <variant>

namespace sqlgrpo {

enum class ColumnType { Int, Real, Text };

const char* to_string(ColumnType type);
ColumnType column_type_from_string(const std::string& name);

/// Tagged scalar stored in database rows and SQL literals.
class Value {
public:
    enum class Kind { Null, Int, Real, Text };

    Value() = default;

    static Value null() { return Value(); }
    static Value integer(std::int64_t v);
    /// Throws IntegrityError for NaN or infinity.
    static Value real(double v);
    static Value text(std::string v);

    Kind kind() const { return static_cast<Kind>(data_.index()); }
    bool is_null() const { return kind() == Kind::Null; }
    bool is_numeric() const { return kind() == Kind::Int || kind() == Kind::Real; }

    std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
    double as_real() const { return std::get<double>(data_); }
    const std::string& as_text() const { return std::get<std::string>(data_); }
    /// Int or Real widened to double.
    double numeric() const;

    /// Structural equality: Int 1 and Real 1.0 differ.
    bool operator==(const Value& other) const = default;

    /// Human-readable form used in diagnostics and result dumps.
    std::string debug_string() const;

private:
    std::variant<std::monostate, std::int64_t, double, std::string> data_;
};

bool matches_type(const Value& v, ColumnType type);

/// SQL value equality with numeric widening; Reals equal within relative
/// tolerance. Null equals Null (grouping/DISTINCT semantics).
bool values_equivalent(const Value& a, const Value& b, double rel_tol = 1e-9);

/// Total order: Null < numbers < text. Numbers compare numerically, text
/// bytewise.
int compare_values(const Value& a, const Value& b);

nlohmann::json value_to_json(const Value& v);
/// Decodes a JSON scalar; integers are widened when the column is real.
/// Mismatched types are kept as-is for validate_state to report.
Value value_from_json(const nlohmann::json& j, ColumnType type);

} // namespace sqlgrpo
