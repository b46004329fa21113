// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/sql/parser.hpp"

#include "sqlgrpo/common/text.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace sqlgrpo::sql {

namespace {

constexpr std::array<std::string_view, 25> kKeywords = {
    "SELECT", "DISTINCT", "FROM", "JOIN", "INNER",   "ON",  "WHERE", "GROUP", "BY",
    "HAVING", "ORDER",    "ASC",  "DESC", "LIMIT",   "AND", "OR",    "NOT",   "IN",
    "LIKE",   "BETWEEN",  "IS",   "NULL", "AS",      "UNION", "CASE"};

bool is_keyword(std::string_view upper) {
    for (auto k : kKeywords) {
        if (k == upper) {
            return true;
        }
    }
    return false;
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string join_expected(const std::vector<std::string>& expected) {
    std::string out;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += expected[i];
    }
    return out;
}

} // namespace

LexError::LexError(const std::string& message, std::size_t offset)
    : Error("lex error at offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

ParseError::ParseError(const std::string& found, std::size_t offset, std::vector<std::string> expected)
    : Error("parse error at offset " + std::to_string(offset) + " near '" + found + "': expected " +
            join_expected(expected)),
      found_(found), offset_(offset), expected_(std::move(expected)) {}

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    while (i < n) {
        const char c = sql[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (ident_start(c)) {
            while (i < n && ident_char(sql[i])) {
                ++i;
            }
            std::string word(sql.substr(start, i - start));
            const std::string upper = to_upper(word);
            if (is_keyword(upper)) {
                out.push_back({TokenKind::Keyword, upper, start});
            } else {
                out.push_back({TokenKind::Identifier, std::move(word), start});
            }
            continue;
        }
        if (c == '"') {
            ++i;
            std::string word;
            while (i < n && sql[i] != '"') {
                word += sql[i++];
            }
            if (i >= n) {
                throw LexError("unterminated quoted identifier", start);
            }
            ++i;
            if (word.empty()) {
                throw LexError("empty quoted identifier", start);
            }
            out.push_back({TokenKind::Identifier, std::move(word), start});
            continue;
        }
        if (digit(c) || (c == '.' && i + 1 < n && digit(sql[i + 1]))) {
            bool real = false;
            while (i < n && digit(sql[i])) {
                ++i;
            }
            if (i < n && sql[i] == '.') {
                real = true;
                ++i;
                while (i < n && digit(sql[i])) {
                    ++i;
                }
            }
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (sql[j] == '+' || sql[j] == '-')) {
                    ++j;
                }
                if (j < n && digit(sql[j])) {
                    real = true;
                    i = j;
                    while (i < n && digit(sql[i])) {
                        ++i;
                    }
                }
            }
            if (i < n && ident_start(sql[i])) {
                throw LexError("malformed number", start);
            }
            out.push_back({real ? TokenKind::Real : TokenKind::Integer, std::string(sql.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'') {
            ++i;
            std::string value;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {
                        value += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                value += sql[i++];
            }
            if (!closed) {
                throw LexError("unterminated string literal", start);
            }
            out.push_back({TokenKind::String, std::move(value), start});
            continue;
        }
        auto two = [&](char a, char b) { return c == a && i + 1 < n && sql[i + 1] == b; };
        if (two('!', '=') || two('<', '>')) {
            out.push_back({TokenKind::Symbol, "!=", start});
            i += 2;
            continue;
        }
        if (two('<', '=') || two('>', '=')) {
            out.push_back({TokenKind::Symbol, std::string(sql.substr(start, 2)), start});
            i += 2;
            continue;
        }
        if (two('=', '=')) {
            out.push_back({TokenKind::Symbol, "=", start});
            i += 2;
            continue;
        }
        switch (c) {
        case '(': case ')': case ',': case '.': case '*': case '=':
        case '<': case '>': case '+': case '-': case '/': case ';':
            out.push_back({TokenKind::Symbol, std::string(1, c), start});
            ++i;
            continue;
        default:
            break;
        }
        throw LexError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({TokenKind::End, "", n});
    return out;
}

namespace {

std::optional<AggFunc> aggregate_name(std::string_view ident) {
    const std::string u = to_upper(ident);
    if (u == "COUNT") return AggFunc::Count;
    if (u == "SUM") return AggFunc::Sum;
    if (u == "AVG") return AggFunc::Avg;
    if (u == "MIN") return AggFunc::Min;
    if (u == "MAX") return AggFunc::Max;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Select parse_statement() {
        Select s = parse_select();
        accept_symbol(";");
        if (peek().kind != TokenKind::End) {
            fail({"end of input"});
        }
        return s;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const auto idx = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[idx];
    }
    const Token& advance() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Symbol && peek(ahead).text == s;
    }
    bool is_keyword(std::string_view k, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Keyword && peek(ahead).text == k;
    }
    bool accept_symbol(std::string_view s) {
        if (is_symbol(s)) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool accept_keyword(std::string_view k) {
        if (is_keyword(k)) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect_symbol(std::string_view s) {
        if (!accept_symbol(s)) {
            fail({"'" + std::string(s) + "'"});
        }
    }
    void expect_keyword(std::string_view k) {
        if (!accept_keyword(k)) {
            fail({std::string(k)});
        }
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        const std::string found = t.kind == TokenKind::End ? "<end>" : t.text;
        throw ParseError(found, t.offset, std::move(expected));
    }

    std::string parse_identifier() {
        if (peek().kind != TokenKind::Identifier) {
            fail({"identifier"});
        }
        return advance().text;
    }

    Select parse_select() {
        expect_keyword("SELECT");
        Select s;
        s.distinct = accept_keyword("DISTINCT");
        do {
            s.items.push_back(parse_select_item());
        } while (accept_symbol(","));
        if (accept_keyword("FROM")) {
            s.from = parse_table_ref();
            while (is_keyword("JOIN") || is_keyword("INNER")) {
                if (accept_keyword("INNER")) {
                    expect_keyword("JOIN");
                } else {
                    advance();
                }
                Join j;
                j.table = parse_table_ref();
                expect_keyword("ON");
                j.on = parse_expr();
                s.joins.push_back(std::move(j));
            }
        }
        if (accept_keyword("WHERE")) {
            s.where = parse_expr();
        }
        if (accept_keyword("GROUP")) {
            expect_keyword("BY");
            do {
                s.group_by.push_back(parse_column_ref());
            } while (accept_symbol(","));
        }
        if (accept_keyword("HAVING")) {
            s.having = parse_expr();
        }
        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            do {
                OrderItem item;
                item.expr = parse_expr();
                if (accept_keyword("DESC")) {
                    item.descending = true;
                } else {
                    accept_keyword("ASC");
                }
                s.order_by.push_back(std::move(item));
            } while (accept_symbol(","));
        }
        if (accept_keyword("LIMIT")) {
            if (peek().kind != TokenKind::Integer) {
                fail({"non-negative integer"});
            }
            const Token& t = advance();
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
                throw ParseError(t.text, t.offset, {"non-negative integer"});
            }
            s.limit = v;
        }
        return s;
    }

    SelectItem parse_select_item() {
        SelectItem item;
        if (accept_symbol("*")) {
            item.star = true;
            return item;
        }
        if (!starts_expression()) {
            fail({"expression", "'*'"});
        }
        item.expr = parse_expr();
        return item;
    }

    bool starts_expression() const {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::Identifier:
        case TokenKind::Integer:
        case TokenKind::Real:
        case TokenKind::String:
            return true;
        case TokenKind::Keyword:
            return t.text == "NOT" || t.text == "NULL";
        case TokenKind::Symbol:
            return t.text == "(" || t.text == "-";
        case TokenKind::End:
            return false;
        }
        return false;
    }

    TableRef parse_table_ref() {
        TableRef ref;
        ref.name = parse_identifier();
        if (accept_keyword("AS")) {
            ref.alias = parse_identifier();
        } else if (peek().kind == TokenKind::Identifier) {
            ref.alias = advance().text;
        }
        return ref;
    }

    Expr parse_column_ref() {
        std::string first = parse_identifier();
        if (accept_symbol(".")) {
            return Expr::column_ref(std::move(first), parse_identifier());
        }
        return Expr::column_ref("", std::move(first));
    }

    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (accept_keyword("OR")) {
            lhs = Expr::binary(BinaryOp::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (accept_keyword("AND")) {
            lhs = Expr::binary(BinaryOp::And, std::move(lhs), parse_not());
        }
        return lhs;
    }

    Expr parse_not() {
        if (accept_keyword("NOT")) {
            return Expr::unary(UnaryOp::Not, parse_not());
        }
        return parse_predicate();
    }

    Expr parse_predicate() {
        Expr lhs = parse_additive();
        if (peek().kind == TokenKind::Symbol) {
            const std::string& s = peek().text;
            std::optional<BinaryOp> op;
            if (s == "=") op = BinaryOp::Eq;
            else if (s == "!=") op = BinaryOp::Ne;
            else if (s == "<") op = BinaryOp::Lt;
            else if (s == "<=") op = BinaryOp::Le;
            else if (s == ">") op = BinaryOp::Gt;
            else if (s == ">=") op = BinaryOp::Ge;
            if (op) {
                advance();
                return Expr::binary(*op, std::move(lhs), parse_additive());
            }
        }
        if (accept_keyword("IS")) {
            Expr e;
            e.kind = Expr::Kind::IsNull;
            e.negated = accept_keyword("NOT");
            expect_keyword("NULL");
            e.args.push_back(std::move(lhs));
            return e;
        }
        const bool negated = is_keyword("NOT") &&
                             (is_keyword("IN", 1) || is_keyword("LIKE", 1) || is_keyword("BETWEEN", 1));
        if (negated) {
            advance();
        }
        if (accept_keyword("IN")) {
            expect_symbol("(");
            Expr e;
            e.negated = negated;
            e.args.push_back(std::move(lhs));
            if (is_keyword("SELECT")) {
                e.kind = Expr::Kind::InSubquery;
                e.subquery = parse_select();
            } else {
                e.kind = Expr::Kind::InList;
                do {
                    e.args.push_back(parse_expr());
                } while (accept_symbol(","));
            }
            expect_symbol(")");
            return e;
        }
        if (accept_keyword("LIKE")) {
            Expr e;
            e.kind = Expr::Kind::Like;
            e.negated = negated;
            e.args.push_back(std::move(lhs));
            e.args.push_back(parse_additive());
            return e;
        }
        if (accept_keyword("BETWEEN")) {
            Expr e;
            e.kind = Expr::Kind::Between;
            e.negated = negated;
            e.args.push_back(std::move(lhs));
            e.args.push_back(parse_additive());
            expect_keyword("AND");
            e.args.push_back(parse_additive());
            return e;
        }
        if (negated) {
            fail({"IN", "LIKE", "BETWEEN"});
        }
        return lhs;
    }

    Expr parse_additive() {
        Expr lhs = parse_multiplicative();
        for (;;) {
            if (accept_symbol("+")) {
                lhs = Expr::binary(BinaryOp::Add, std::move(lhs), parse_multiplicative());
            } else if (accept_symbol("-")) {
                lhs = Expr::binary(BinaryOp::Sub, std::move(lhs), parse_multiplicative());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_multiplicative() {
        Expr lhs = parse_unary();
        for (;;) {
            if (accept_symbol("*")) {
                lhs = Expr::binary(BinaryOp::Mul, std::move(lhs), parse_unary());
            } else if (accept_symbol("/")) {
                lhs = Expr::binary(BinaryOp::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    Expr parse_unary() {
        if (accept_symbol("-")) {
            // A minus directly before a number folds into a negative literal.
            if (peek().kind == TokenKind::Integer || peek().kind == TokenKind::Real) {
                return number_literal(advance(), true);
            }
            return Expr::unary(UnaryOp::Neg, parse_unary());
        }
        return parse_primary();
    }

    Expr number_literal(const Token& t, bool negative) {
        if (t.kind == TokenKind::Integer) {
            const std::string text = (negative ? "-" : "") + t.text;
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                throw LexError("integer literal out of range", t.offset);
            }
            return Expr::lit(Value::integer(v));
        }
        const double v = std::strtod(t.text.c_str(), nullptr);
        if (!std::isfinite(v)) {
            throw LexError("real literal out of range", t.offset);
        }
        return Expr::lit(Value::real(negative ? -v : v));
    }

    Expr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::Integer:
        case TokenKind::Real:
            return number_literal(advance(), false);
        case TokenKind::String:
            return Expr::lit(Value::text(advance().text));
        case TokenKind::Keyword:
            if (t.text == "NULL") {
                advance();
                return Expr::lit(Value::null());
            }
            break;
        case TokenKind::Identifier:
            if (is_symbol("(", 1)) {
                const auto agg = aggregate_name(t.text);
                if (!agg) {
                    fail({"aggregate function"});
                }
                advance();
                advance();
                Expr e;
                e.kind = Expr::Kind::Aggregate;
                e.agg = *agg;
                if (*agg == AggFunc::Count && accept_symbol("*")) {
                    e.star = true;
                } else {
                    e.distinct = accept_keyword("DISTINCT");
                    e.args.push_back(parse_expr());
                }
                expect_symbol(")");
                return e;
            }
            return parse_column_ref();
        case TokenKind::Symbol:
            if (t.text == "(") {
                advance();
                if (is_keyword("SELECT")) {
                    Expr e;
                    e.kind = Expr::Kind::Subquery;
                    e.subquery = parse_select();
                    expect_symbol(")");
                    return e;
                }
                Expr inner = parse_expr();
                expect_symbol(")");
                return inner;
            }
            break;
        case TokenKind::End:
            break;
        }
        fail({"expression"});
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// Binding strength used to decide where parentheses are required.
int precedence(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::Lt:
        case BinaryOp::Le: case BinaryOp::Gt: case BinaryOp::Ge: return 4;
        case BinaryOp::Add: case BinaryOp::Sub: return 5;
        case BinaryOp::Mul: case BinaryOp::Div: return 6;
        }
        return 0;
    case Expr::Kind::Unary:
        return e.unary_op == UnaryOp::Not ? 3 : 7;
    case Expr::Kind::InList:
    case Expr::Kind::InSubquery:
    case Expr::Kind::Like:
    case Expr::Kind::Between:
    case Expr::Kind::IsNull:
        return 4;
    default:
        return 8;
    }
}

std::string render_identifier(const std::string& name) {
    bool plain = !name.empty() && ident_start(name[0]);
    for (char c : name) {
        plain = plain && ident_char(c);
    }
    if (plain && !is_keyword(to_upper(name))) {
        return name;
    }
    return "\"" + name + "\"";
}

std::string render_literal(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Null: return "NULL";
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Real: {
        std::array<char, 64> buf{};
        auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v.as_real());
        std::string s(buf.data(), ptr);
        if (s.find_first_of(".e") == std::string::npos) {
            s += ".0";
        }
        return s;
    }
    case Value::Kind::Text: {
        std::string out = "'";
        for (char c : v.as_text()) {
            out += c;
            if (c == '\'') {
                out += '\'';
            }
        }
        return out + "'";
    }
    }
    return "NULL";
}

std::string render_select(const Select& s);

std::string render_expr(const Expr& e);

std::string wrap_if(const Expr& e, bool needed) {
    return needed ? "(" + render_expr(e) + ")" : render_expr(e);
}

bool is_number_literal(const Expr& e) {
    return e.kind == Expr::Kind::Literal && e.literal.is_numeric();
}

std::string render_expr(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Column:
        return e.table.empty() ? render_identifier(e.column)
                               : render_identifier(e.table) + "." + render_identifier(e.column);
    case Expr::Kind::Literal:
        return render_literal(e.literal);
    case Expr::Kind::Unary:
        if (e.unary_op == UnaryOp::Not) {
            return "NOT " + wrap_if(e.args[0], precedence(e.args[0]) < 3);
        }
        return "-" + wrap_if(e.args[0], precedence(e.args[0]) < 8 || is_number_literal(e.args[0]));
    case Expr::Kind::Binary: {
        const int p = precedence(e);
        const bool comparison = p == 4;
        const auto& l = e.args[0];
        const auto& r = e.args[1];
        const bool lp = comparison ? precedence(l) <= p : precedence(l) < p;
        const bool rp = precedence(r) <= p;
        return wrap_if(l, lp) + " " + to_string(e.binary_op) + " " + wrap_if(r, rp);
    }
    case Expr::Kind::Aggregate: {
        std::string out = std::string(to_string(e.agg)) + "(";
        if (e.star) {
            out += "*";
        } else {
            if (e.distinct) {
                out += "DISTINCT ";
            }
            out += render_expr(e.args[0]);
        }
        return out + ")";
    }
    case Expr::Kind::InList: {
        std::string out = wrap_if(e.args[0], precedence(e.args[0]) <= 4) + (e.negated ? " NOT IN (" : " IN (");
        for (std::size_t i = 1; i < e.args.size(); ++i) {
            if (i > 1) {
                out += ", ";
            }
            out += render_expr(e.args[i]);
        }
        return out + ")";
    }
    case Expr::Kind::InSubquery:
        return wrap_if(e.args[0], precedence(e.args[0]) <= 4) + (e.negated ? " NOT IN (" : " IN (") +
               render_select(*e.subquery) + ")";
    case Expr::Kind::Like:
        return wrap_if(e.args[0], precedence(e.args[0]) <= 4) + (e.negated ? " NOT LIKE " : " LIKE ") +
               wrap_if(e.args[1], precedence(e.args[1]) <= 4);
    case Expr::Kind::Between:
        return wrap_if(e.args[0], precedence(e.args[0]) <= 4) + (e.negated ? " NOT BETWEEN " : " BETWEEN ") +
               wrap_if(e.args[1], precedence(e.args[1]) <= 4) + " AND " +
               wrap_if(e.args[2], precedence(e.args[2]) <= 4);
    case Expr::Kind::IsNull:
        return wrap_if(e.args[0], precedence(e.args[0]) <= 4) + (e.negated ? " IS NOT NULL" : " IS NULL");
    case Expr::Kind::Subquery:
        return "(" + render_select(*e.subquery) + ")";
    }
    return "";
}

std::string render_table_ref(const TableRef& t) {
    std::string out = render_identifier(t.name);
    if (!t.alias.empty()) {
        out += " AS " + render_identifier(t.alias);
    }
    return out;
}

std::string render_select(const Select& s) {
    std::string out = "SELECT ";
    if (s.distinct) {
        out += "DISTINCT ";
    }
    for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += s.items[i].star ? "*" : render_expr(s.items[i].expr);
    }
    if (s.from) {
        out += " FROM " + render_table_ref(*s.from);
        for (const auto& j : s.joins) {
            out += " JOIN " + render_table_ref(j.table) + " ON " + render_expr(j.on);
        }
    }
    if (s.where) {
        out += " WHERE " + render_expr(*s.where);
    }
    if (!s.group_by.empty()) {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < s.group_by.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += render_expr(s.group_by[i]);
        }
    }
    if (s.having) {
        out += " HAVING " + render_expr(*s.having);
    }
    if (!s.order_by.empty()) {
        out += " ORDER BY ";
        for (std::size_t i = 0; i < s.order_by.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += render_expr(s.order_by[i].expr);
            if (s.order_by[i].descending) {
                out += " DESC";
            }
        }
    }
    if (s.limit) {
        out += " LIMIT " + std::to_string(*s.limit);
    }
    return out;
}

} // namespace

Select parse(std::string_view sql) {
    Parser parser(tokenize(sql));
    return parser.parse_statement();
}

std::string render(const Select& select) { return render_select(select); }

std::string render(const Expr& expr) { return render_expr(expr); }

} // namespace sqlgrpo::sql
