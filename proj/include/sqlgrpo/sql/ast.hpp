// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/db/value.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sqlgrpo::sql {

/// Owning pointer with value semantics (deep copy, deep equality).
template <class T>
class Box {
public:
    Box() = default;
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& other) : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& other) {
        if (this != &other) {
            ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
        }
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    explicit operator bool() const { return static_cast<bool>(ptr_); }
    T& operator*() { return *ptr_; }
    const T& operator*() const { return *ptr_; }
    T* operator->() { return ptr_.get(); }
    const T* operator->() const { return ptr_.get(); }

    bool operator==(const Box& other) const {
        if (!ptr_ || !other.ptr_) {
            return !ptr_ && !other.ptr_;
        }
        return *ptr_ == *other.ptr_;
    }

private:
    std::unique_ptr<T> ptr_;
};

enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div };
enum class UnaryOp { Not, Neg };
enum class AggFunc { Count, Sum, Avg, Min, Max };

const char* to_string(BinaryOp op);
const char* to_string(AggFunc f);

struct Select;

struct Expr {
    enum class Kind {
        Column,     // table (may be empty), column
        Literal,    // literal
        Unary,      // unary_op, args[0]
        Binary,     // binary_op, args[0], args[1]
        Aggregate,  // agg, distinct, star (COUNT(*)) or args[0]
        InList,     // args[0] IN (args[1..]), negated
        InSubquery, // args[0] IN (subquery), negated
        Like,       // args[0] LIKE args[1], negated
        Between,    // args[0] BETWEEN args[1] AND args[2], negated
        IsNull,     // args[0] IS [NOT] NULL, negated
        Subquery,   // scalar (subquery)
    };

    Kind kind = Kind::Literal;
    std::string table;
    std::string column;
    Value literal;
    UnaryOp unary_op = UnaryOp::Not;
    BinaryOp binary_op = BinaryOp::Eq;
    AggFunc agg = AggFunc::Count;
    bool distinct = false;
    bool star = false;
    bool negated = false;
    std::vector<Expr> args;
    Box<Select> subquery;

    bool operator==(const Expr&) const = default;

    static Expr column_ref(std::string table, std::string column);
    static Expr lit(Value v);
    static Expr unary(UnaryOp op, Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr count_star();
    static Expr aggregate(AggFunc f, Expr arg, bool distinct = false);
};

struct SelectItem {
    bool star = false;
    Expr expr;

    bool operator==(const SelectItem&) const = default;
};

struct TableRef {
    std::string name;
    std::string alias;

    /// Name that column qualifiers bind to.
    const std::string& binding() const { return alias.empty() ? name : alias; }
    bool operator==(const TableRef&) const = default;
};

struct Join {
    TableRef table;
    Expr on;

    bool operator==(const Join&) const = default;
};

struct OrderItem {
    Expr expr;
    bool descending = false;

    bool operator==(const OrderItem&) const = default;
};

struct Select {
    bool distinct = false;
    std::vector<SelectItem> items;
    std::optional<TableRef> from;
    std::vector<Join> joins;
    std::optional<Expr> where;
    std::vector<Expr> group_by;
    std::optional<Expr> having;
    std::vector<OrderItem> order_by;
    std::optional<std::int64_t> limit;

    bool operator==(const Select&) const = default;
};

/// True if the expression contains an aggregate outside any subquery.
bool contains_aggregate(const Expr& e);

} // namespace sqlgrpo::sql
