// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/sql/ast.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sqlgrpo::sql {

enum class TokenKind { Identifier, Keyword, Integer, Real, String, Symbol, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // keywords upper-cased; strings unescaped
    std::size_t offset = 0;
};

class LexError : public Error {
public:
    LexError(const std::string& message, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& found, std::size_t offset, std::vector<std::string> expected);
    std::size_t offset() const { return offset_; }
    const std::string& found() const { return found_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::string found_;
    std::size_t offset_;
    std::vector<std::string> expected_;
};

std::vector<Token> tokenize(std::string_view sql);

/// Parses one SELECT statement (optionally ';'-terminated). Keywords are
/// case-insensitive. Throws LexError or ParseError.
Select parse(std::string_view sql);

/// Canonical single-line form: upper-case keywords, single spaces, minimal
/// parentheses. parse(render(s)) == s.
std::string render(const Select& select);
std::string render(const Expr& expr);

} // namespace sqlgrpo::sql
