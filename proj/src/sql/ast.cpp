// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/sql/ast.hpp"

namespace sqlgrpo::sql {

const char* to_string(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return "OR";
    case BinaryOp::And: return "AND";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    }
    return "?";
}

const char* to_string(AggFunc f) {
    switch (f) {
    case AggFunc::Count: return "COUNT";
    case AggFunc::Sum: return "SUM";
    case AggFunc::Avg: return "AVG";
    case AggFunc::Min: return "MIN";
    case AggFunc::Max: return "MAX";
    }
    return "?";
}

Expr Expr::column_ref(std::string table, std::string column) {
    Expr e;
    e.kind = Kind::Column;
    e.table = std::move(table);
    e.column = std::move(column);
    return e;
}

Expr Expr::lit(Value v) {
    Expr e;
    e.kind = Kind::Literal;
    e.literal = std::move(v);
    return e;
}

Expr Expr::unary(UnaryOp op, Expr operand) {
    Expr e;
    e.kind = Kind::Unary;
    e.unary_op = op;
    e.args.push_back(std::move(operand));
    return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::Binary;
    e.binary_op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

Expr Expr::count_star() {
    Expr e;
    e.kind = Kind::Aggregate;
    e.agg = AggFunc::Count;
    e.star = true;
    return e;
}

Expr Expr::aggregate(AggFunc f, Expr arg, bool distinct) {
    Expr e;
    e.kind = Kind::Aggregate;
    e.agg = f;
    e.distinct = distinct;
    e.args.push_back(std::move(arg));
    return e;
}

bool contains_aggregate(const Expr& e) {
    if (e.kind == Expr::Kind::Aggregate) {
        return true;
    }
    for (const auto& a : e.args) {
        if (contains_aggregate(a)) {
            return true;
        }
    }
    return false;
}

} // namespace sqlgrpo::sql
