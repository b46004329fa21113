// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/db/value.hpp"

#include "sqlgrpo/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqlgrpo {

const char* to_string(ColumnType type) {
    switch (type) {
    case ColumnType::Int: return "int";
    case ColumnType::Real: return "real";
    case ColumnType::Text: return "text";
    }
    return "?";
}

ColumnType column_type_from_string(const std::string& name) {
    if (name == "int" || name == "integer") return ColumnType::Int;
    if (name == "real" || name == "float" || name == "double") return ColumnType::Real;
    if (name == "text" || name == "string") return ColumnType::Text;
    throw FormatError("unknown column type '" + name + "'");
}

Value Value::integer(std::int64_t v) {
    Value out;
    out.data_ = v;
    return out;
}

Value Value::real(double v) {
    if (!std::isfinite(v)) {
        throw IntegrityError("non-finite real value");
    }
    Value out;
    out.data_ = v;
    return out;
}

Value Value::text(std::string v) {
    Value out;
    out.data_ = std::move(v);
    return out;
}

double Value::numeric() const {
    if (kind() == Kind::Int) {
        return static_cast<double>(as_int());
    }
    return as_real();
}

std::string Value::debug_string() const {
    switch (kind()) {
    case Kind::Null: return "NULL";
    case Kind::Int: return std::to_string(as_int());
    case Kind::Real: {
        std::ostringstream ss;
        ss.precision(17);
        ss << as_real();
        return ss.str();
    }
    case Kind::Text: return "'" + as_text() + "'";
    }
    return "?";
}

bool matches_type(const Value& v, ColumnType type) {
    switch (v.kind()) {
    case Value::Kind::Null: return true;
    case Value::Kind::Int: return type == ColumnType::Int;
    case Value::Kind::Real: return type == ColumnType::Real;
    case Value::Kind::Text: return type == ColumnType::Text;
    }
    return false;
}

bool values_equivalent(const Value& a, const Value& b, double rel_tol) {
    if (a.is_null() || b.is_null()) {
        return a.is_null() && b.is_null();
    }
    if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) {
        return a.as_int() == b.as_int();
    }
    if (a.is_numeric() && b.is_numeric()) {
        const double x = a.numeric();
        const double y = b.numeric();
        if (x == y) {
            return true;
        }
        const double scale = std::max(std::abs(x), std::abs(y));
        return std::abs(x - y) <= rel_tol * scale;
    }
    if (a.kind() == Value::Kind::Text && b.kind() == Value::Kind::Text) {
        return a.as_text() == b.as_text();
    }
    return false;
}

namespace {

int type_rank(const Value& v) {
    if (v.is_null()) return 0;
    if (v.is_numeric()) return 1;
    return 2;
}

} // namespace

int compare_values(const Value& a, const Value& b) {
    const int ra = type_rank(a);
    const int rb = type_rank(b);
    if (ra != rb) {
        return ra < rb ? -1 : 1;
    }
    if (ra == 0) {
        return 0;
    }
    if (ra == 1) {
        if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) {
            return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
        }
        const double x = a.numeric();
        const double y = b.numeric();
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    const int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

nlohmann::json value_to_json(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Null: return nullptr;
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Real: return v.as_real();
    case Value::Kind::Text: return v.as_text();
    }
    return nullptr;
}

Value value_from_json(const nlohmann::json& j, ColumnType type) {
    if (j.is_null()) {
        return Value::null();
    }
    if (j.is_number_integer()) {
        if (type == ColumnType::Real) {
            return Value::real(j.get<double>());
        }
        return Value::integer(j.get<std::int64_t>());
    }
    if (j.is_number()) {
        return Value::real(j.get<double>());
    }
    if (j.is_string()) {
        return Value::text(j.get<std::string>());
    }
    throw FormatError("unsupported JSON value " + j.dump());
}

} // namespace sqlgrpo
