// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/exec/executor.hpp"

#include "sqlgrpo/common/text.hpp"
#include "sqlgrpo/sql/parser.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

namespace sqlgrpo::exec {

using sql::AggFunc;
using sql::BinaryOp;
using sql::Expr;
using sql::Select;
using sql::UnaryOp;

namespace {

constexpr std::size_t kMaxIntermediateRows = 2'000'000;

struct Binding {
    std::string name;
    const Table* table;
    std::size_t offset;
};

struct Scope {
    std::vector<Binding> bindings;
    std::size_t width = 0;

    std::size_t lookup(const Expr& e) const {
        if (!e.table.empty()) {
            for (const auto& b : bindings) {
                if (iequals(b.name, e.table)) {
                    if (auto idx = b.table->column_index(e.column)) {
                        return b.offset + *idx;
                    }
                    throw ExecutionError("no such column: " + e.table + "." + e.column);
                }
            }
            throw ExecutionError("no such table or alias: " + e.table);
        }
        std::optional<std::size_t> found;
        for (const auto& b : bindings) {
            if (auto idx = b.table->column_index(e.column)) {
                if (found) {
                    throw ExecutionError("ambiguous column name: " + e.column);
                }
                found = b.offset + *idx;
            }
        }
        if (!found) {
            throw ExecutionError("no such column: " + e.column);
        }
        return *found;
    }
};

struct RowLess {
    bool operator()(const Row& a, const Row& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const Value& x, const Value& y) { return compare_values(x, y) < 0; });
    }
};

Value boolean(bool b) { return Value::integer(b ? 1 : 0); }

bool truthy(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Null: return false;
    case Value::Kind::Int: return v.as_int() != 0;
    case Value::Kind::Real: return v.as_real() != 0.0;
    case Value::Kind::Text: throw ExecutionError("type error: text used as a condition");
    }
    return false;
}

/// -1/0/1, or nullopt when either side is NULL.
std::optional<int> sql_compare(const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) {
        return std::nullopt;
    }
    if (a.is_numeric() != b.is_numeric()) {
        throw ExecutionError("type error: cannot compare " + a.debug_string() + " with " + b.debug_string());
    }
    return compare_values(a, b);
}

bool like_match(std::string_view text, std::string_view pattern) {
    auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
    // Iterative wildcard matching with backtracking on the last '%'.
    std::size_t t = 0, p = 0, star_p = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '_' || lower(pattern[p]) == lower(text[t]))) {
            ++t;
            ++p;
        } else if (p < pattern.size() && pattern[p] == '%') {
            star_p = p++;
            star_t = t;
        } else if (star_p != std::string_view::npos) {
            p = star_p + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '%') {
        ++p;
    }
    return p == pattern.size();
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) {
        return Value::null();
    }
    if (!a.is_numeric() || !b.is_numeric()) {
        throw ExecutionError(std::string("type error: arithmetic '") + sql::to_string(op) + "' on text");
    }
    if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) {
        const auto x = static_cast<std::uint64_t>(a.as_int());
        const auto y = static_cast<std::uint64_t>(b.as_int());
        switch (op) {
        case BinaryOp::Add: return Value::integer(static_cast<std::int64_t>(x + y));
        case BinaryOp::Sub: return Value::integer(static_cast<std::int64_t>(x - y));
        case BinaryOp::Mul: return Value::integer(static_cast<std::int64_t>(x * y));
        case BinaryOp::Div:
            if (b.as_int() == 0) {
                return Value::null();
            }
            if (b.as_int() == -1) {
                return Value::integer(static_cast<std::int64_t>(0 - x));
            }
            return Value::integer(a.as_int() / b.as_int());
        default: break;
        }
    }
    const double x = a.numeric();
    const double y = b.numeric();
    double r = 0.0;
    switch (op) {
    case BinaryOp::Add: r = x + y; break;
    case BinaryOp::Sub: r = x - y; break;
    case BinaryOp::Mul: r = x * y; break;
    case BinaryOp::Div:
        if (y == 0.0) {
            return Value::null();
        }
        r = x / y;
        break;
    default: break;
    }
    if (!std::isfinite(r)) {
        return Value::null();
    }
    return Value::real(r);
}

class Executor {
public:
    Executor(const Schema& schema, const DatabaseState& state) : schema_(schema), state_(state) {}

    ResultTable run(const Select& s) {
        const Scope scope = make_scope(s);
        std::vector<Row> rows = source_rows(s, scope);

        if (s.where) {
            if (sql::contains_aggregate(*s.where)) {
                throw ExecutionError("misuse of aggregate in WHERE");
            }
            std::vector<Row> kept;
            for (auto& r : rows) {
                if (truthy(eval(*s.where, {&scope, &r, nullptr}))) {
                    kept.push_back(std::move(r));
                }
            }
            rows = std::move(kept);
        }
        for (const auto& g : s.group_by) {
            if (sql::contains_aggregate(g)) {
                throw ExecutionError("misuse of aggregate in GROUP BY");
            }
        }

        bool grouped = !s.group_by.empty();
        for (const auto& item : s.items) {
            grouped = grouped || (!item.star && sql::contains_aggregate(item.expr));
        }
        for (const auto& o : s.order_by) {
            grouped = grouped || sql::contains_aggregate(o.expr);
        }
        if (s.having) {
            if (!grouped && !sql::contains_aggregate(*s.having)) {
                throw ExecutionError("HAVING requires GROUP BY or an aggregate");
            }
            grouped = true;
        }

        ResultTable result;
        result.ordered = !s.order_by.empty();
        for (const auto& item : s.items) {
            if (item.star) {
                for (const auto& b : scope.bindings) {
                    for (const auto& c : b.table->columns) {
                        result.columns.push_back(c.name);
                    }
                }
            } else if (item.expr.kind == Expr::Kind::Column) {
                result.columns.push_back(item.expr.column);
            } else {
                result.columns.push_back(sql::render(item.expr));
            }
        }

        struct Output {
            Row values;
            Row keys;
        };
        std::vector<Output> outputs;
        auto emit = [&](const Frame& f) {
            Output o;
            for (const auto& item : s.items) {
                if (item.star) {
                    if (f.row) {
                        o.values.insert(o.values.end(), f.row->begin(), f.row->end());
                    } else {
                        o.values.insert(o.values.end(), scope.width, Value::null());
                    }
                } else {
                    o.values.push_back(eval(item.expr, f));
                }
            }
            for (const auto& ob : s.order_by) {
                o.keys.push_back(eval(ob.expr, f));
            }
            outputs.push_back(std::move(o));
        };

        if (grouped) {
            std::vector<std::vector<const Row*>> groups;
            if (s.group_by.empty()) {
                groups.emplace_back();
                for (const auto& r : rows) {
                    groups.back().push_back(&r);
                }
            } else {
                std::map<Row, std::size_t, RowLess> index;
                for (const auto& r : rows) {
                    Row key;
                    for (const auto& g : s.group_by) {
                        key.push_back(eval(g, {&scope, &r, nullptr}));
                    }
                    auto [it, inserted] = index.emplace(std::move(key), groups.size());
                    if (inserted) {
                        groups.emplace_back();
                    }
                    groups[it->second].push_back(&r);
                }
            }
            for (const auto& g : groups) {
                const Frame f{&scope, g.empty() ? nullptr : g.front(), &g};
                if (s.having && !truthy(eval(*s.having, f))) {
                    continue;
                }
                emit(f);
            }
        } else {
            for (const auto& r : rows) {
                emit({&scope, &r, nullptr});
            }
        }

        if (s.distinct) {
            std::vector<Output> unique;
            std::map<Row, bool, RowLess> seen;
            for (auto& o : outputs) {
                if (seen.emplace(o.values, true).second) {
                    unique.push_back(std::move(o));
                }
            }
            outputs = std::move(unique);
        }

        if (!s.order_by.empty()) {
            std::stable_sort(outputs.begin(), outputs.end(), [&](const Output& a, const Output& b) {
                for (std::size_t k = 0; k < s.order_by.size(); ++k) {
                    const int c = compare_values(a.keys[k], b.keys[k]);
                    if (c != 0) {
                        return s.order_by[k].descending ? c > 0 : c < 0;
                    }
                }
                return false;
            });
        }

        std::size_t n = outputs.size();
        if (s.limit) {
            n = std::min<std::size_t>(n, static_cast<std::size_t>(std::max<std::int64_t>(0, *s.limit)));
        }
        for (std::size_t i = 0; i < n; ++i) {
            result.rows.push_back(std::move(outputs[i].values));
        }
        return result;
    }

private:
    struct Frame {
        const Scope* scope;
        const Row* row;                          // first row of the group when grouped
        const std::vector<const Row*>* group;    // non-null in grouped context
    };

    Scope make_scope(const Select& s) const {
        Scope scope;
        auto add = [&](const sql::TableRef& ref) {
            const Table* t = schema_.find_table(ref.name);
            if (t == nullptr) {
                throw ExecutionError("no such table: " + ref.name);
            }
            for (const auto& b : scope.bindings) {
                if (iequals(b.name, ref.binding())) {
                    throw ExecutionError("ambiguous table name: " + ref.binding());
                }
            }
            scope.bindings.push_back({ref.binding(), t, scope.width});
            scope.width += t->columns.size();
        };
        if (s.from) {
            add(*s.from);
        }
        for (const auto& j : s.joins) {
            add(j.table);
        }
        return scope;
    }

    std::vector<Row> source_rows(const Select& s, const Scope& scope) {
        std::vector<Row> rows;
        if (!s.from) {
            rows.emplace_back();
            return rows;
        }
        for (const auto& r : state_.table_rows(scope.bindings[0].table->name)) {
            rows.push_back(r);
        }
        for (std::size_t j = 0; j < s.joins.size(); ++j) {
            const auto& join = s.joins[j];
            if (sql::contains_aggregate(join.on)) {
                throw ExecutionError("misuse of aggregate in ON");
            }
            // Columns of tables joined later are not visible yet.
            Scope partial;
            partial.bindings.assign(scope.bindings.begin(), scope.bindings.begin() + static_cast<long>(j) + 2);
            partial.width = 0;
            for (const auto& b : partial.bindings) {
                partial.width += b.table->columns.size();
            }
            const auto& right = state_.table_rows(scope.bindings[j + 1].table->name);
            std::vector<Row> joined;
            for (const auto& l : rows) {
                for (const auto& r : right) {
                    Row combined = l;
                    combined.insert(combined.end(), r.begin(), r.end());
                    if (truthy(eval(join.on, {&partial, &combined, nullptr}))) {
                        joined.push_back(std::move(combined));
                        if (joined.size() > kMaxIntermediateRows) {
                            throw ExecutionError("join result too large");
                        }
                    }
                }
            }
            rows = std::move(joined);
        }
        return rows;
    }

    const std::vector<Row>& subquery_rows(const Select& sub) {
        for (const auto& [ptr, result] : subquery_cache_) {
            if (ptr == &sub) {
                return result.rows;
            }
        }
        ResultTable r = Executor(schema_, state_).run(sub);
        if (r.columns.size() != 1) {
            throw ExecutionError("subquery must return exactly one column");
        }
        subquery_cache_.emplace_back(&sub, std::move(r));
        return subquery_cache_.back().second.rows;
    }

    Value aggregate(const Expr& e, const Frame& f) {
        if (f.group == nullptr) {
            throw ExecutionError("misuse of aggregate " + sql::render(e));
        }
        if (!e.args.empty() && sql::contains_aggregate(e.args[0])) {
            throw ExecutionError("nested aggregate " + sql::render(e));
        }
        if (e.star) {
            return Value::integer(static_cast<std::int64_t>(f.group->size()));
        }
        std::vector<Value> inputs;
        for (const Row* r : *f.group) {
            Value v = eval(e.args[0], {f.scope, r, nullptr});
            if (!v.is_null()) {
                inputs.push_back(std::move(v));
            }
        }
        if (e.distinct) {
            std::vector<Value> unique;
            for (auto& v : inputs) {
                const bool dup = std::any_of(unique.begin(), unique.end(),
                                             [&](const Value& u) { return compare_values(u, v) == 0; });
                if (!dup) {
                    unique.push_back(std::move(v));
                }
            }
            inputs = std::move(unique);
        }
        switch (e.agg) {
        case AggFunc::Count:
            return Value::integer(static_cast<std::int64_t>(inputs.size()));
        case AggFunc::Sum:
        case AggFunc::Avg: {
            if (inputs.empty()) {
                return Value::null();
            }
            bool all_int = true;
            for (const auto& v : inputs) {
                if (!v.is_numeric()) {
                    throw ExecutionError(std::string("type error: ") + sql::to_string(e.agg) + " over text");
                }
                all_int = all_int && v.kind() == Value::Kind::Int;
            }
            if (e.agg == AggFunc::Sum && all_int) {
                std::uint64_t acc = 0;
                for (const auto& v : inputs) {
                    acc += static_cast<std::uint64_t>(v.as_int());
                }
                return Value::integer(static_cast<std::int64_t>(acc));
            }
            double acc = 0.0;
            for (const auto& v : inputs) {
                acc += v.numeric();
            }
            if (e.agg == AggFunc::Avg) {
                acc /= static_cast<double>(inputs.size());
            }
            return std::isfinite(acc) ? Value::real(acc) : Value::null();
        }
        case AggFunc::Min:
        case AggFunc::Max: {
            if (inputs.empty()) {
                return Value::null();
            }
            const Value* best = &inputs[0];
            for (const auto& v : inputs) {
                const int c = compare_values(v, *best);
                if ((e.agg == AggFunc::Min && c < 0) || (e.agg == AggFunc::Max && c > 0)) {
                    best = &v;
                }
            }
            return *best;
        }
        }
        return Value::null();
    }

    Value eval(const Expr& e, const Frame& f) {
        switch (e.kind) {
        case Expr::Kind::Column: {
            const std::size_t idx = f.scope->lookup(e);
            if (f.row == nullptr) {
                return Value::null();
            }
            return (*f.row)[idx];
        }
        case Expr::Kind::Literal:
            return e.literal;
        case Expr::Kind::Unary: {
            const Value v = eval(e.args[0], f);
            if (e.unary_op == UnaryOp::Not) {
                return boolean(!truthy(v));
            }
            if (v.is_null()) return v;
            if (v.kind() == Value::Kind::Int) return Value::integer(static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(v.as_int())));
            if (v.kind() == Value::Kind::Real) return Value::real(-v.as_real());
            throw ExecutionError("type error: negation of text");
        }
        case Expr::Kind::Binary: {
            switch (e.binary_op) {
            case BinaryOp::And:
                return boolean(truthy(eval(e.args[0], f)) && truthy(eval(e.args[1], f)));
            case BinaryOp::Or: {
                const bool l = truthy(eval(e.args[0], f));
                const bool r = truthy(eval(e.args[1], f));
                return boolean(l || r);
            }
            case BinaryOp::Add: case BinaryOp::Sub: case BinaryOp::Mul: case BinaryOp::Div:
                return arithmetic(e.binary_op, eval(e.args[0], f), eval(e.args[1], f));
            default: {
                const auto c = sql_compare(eval(e.args[0], f), eval(e.args[1], f));
                if (!c) {
                    return boolean(false);
                }
                switch (e.binary_op) {
                case BinaryOp::Eq: return boolean(*c == 0);
                case BinaryOp::Ne: return boolean(*c != 0);
                case BinaryOp::Lt: return boolean(*c < 0);
                case BinaryOp::Le: return boolean(*c <= 0);
                case BinaryOp::Gt: return boolean(*c > 0);
                case BinaryOp::Ge: return boolean(*c >= 0);
                default: break;
                }
                return boolean(false);
            }
            }
        }
        case Expr::Kind::Aggregate:
            return aggregate(e, f);
        case Expr::Kind::InList: {
            const Value lhs = eval(e.args[0], f);
            bool found = false;
            for (std::size_t i = 1; i < e.args.size(); ++i) {
                const auto c = sql_compare(lhs, eval(e.args[i], f));
                found = found || (c && *c == 0);
            }
            return boolean(found != e.negated);
        }
        case Expr::Kind::InSubquery: {
            const Value lhs = eval(e.args[0], f);
            bool found = false;
            for (const auto& r : subquery_rows(*e.subquery)) {
                const auto c = sql_compare(lhs, r[0]);
                if (c && *c == 0) {
                    found = true;
                    break;
                }
            }
            return boolean(found != e.negated);
        }
        case Expr::Kind::Like: {
            const Value text = eval(e.args[0], f);
            const Value pattern = eval(e.args[1], f);
            if (text.is_null() || pattern.is_null()) {
                return boolean(e.negated);
            }
            if (text.kind() != Value::Kind::Text || pattern.kind() != Value::Kind::Text) {
                throw ExecutionError("type error: LIKE requires text operands");
            }
            return boolean(like_match(text.as_text(), pattern.as_text()) != e.negated);
        }
        case Expr::Kind::Between: {
            const Value v = eval(e.args[0], f);
            const auto lo = sql_compare(v, eval(e.args[1], f));
            const auto hi = sql_compare(v, eval(e.args[2], f));
            const bool in = lo && hi && *lo >= 0 && *hi <= 0;
            return boolean(in != e.negated);
        }
        case Expr::Kind::IsNull:
            return boolean(eval(e.args[0], f).is_null() != e.negated);
        case Expr::Kind::Subquery: {
            const auto& rows = subquery_rows(*e.subquery);
            return rows.empty() ? Value::null() : rows.front()[0];
        }
        }
        return Value::null();
    }

    const Schema& schema_;
    const DatabaseState& state_;
    std::vector<std::pair<const Select*, ResultTable>> subquery_cache_;
};

bool rows_equal(const Row& a, const Row& b, double rel_tol) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!values_equivalent(a[i], b[i], rel_tol)) {
            return false;
        }
    }
    return true;
}

} // namespace

ResultTable execute(const Select& select, const Schema& schema, const DatabaseState& state) {
    return Executor(schema, state).run(select);
}

bool compare_results(const ResultTable& a, const ResultTable& b, double rel_tol) {
    if (a.columns.size() != b.columns.size() || a.rows.size() != b.rows.size()) {
        return false;
    }
    if (a.ordered || b.ordered) {
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            if (!rows_equal(a.rows[i], b.rows[i], rel_tol)) {
                return false;
            }
        }
        return true;
    }
    std::vector<bool> used(b.rows.size(), false);
    for (const auto& ra : a.rows) {
        bool matched = false;
        for (std::size_t j = 0; j < b.rows.size(); ++j) {
            if (!used[j] && rows_equal(ra, b.rows[j], rel_tol)) {
                used[j] = true;
                matched = true;
                break;
            }
        }
        if (!matched) {
            return false;
        }
    }
    return true;
}

} // namespace sqlgrpo::exec
