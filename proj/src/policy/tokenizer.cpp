// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/policy/tokenizer.hpp"

namespace sqlgrpo::policy {

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    out.reserve(text.size());
    for (unsigned char c : text) out.push_back(static_cast<Token>(c));
    return out;
}

std::string detokenize(const std::vector<Token>& tokens) {
    std::string out;
    out.reserve(tokens.size());
    for (Token t : tokens) {
        if (t >= 0 && t < 256) out.push_back(static_cast<char>(static_cast<unsigned char>(t)));
    }
    return out;
}

std::string serialize_schema(const Schema& schema) {
    std::string out;
    for (std::size_t i = 0; i < schema.tables.size(); ++i) {
        const Table& t = schema.tables[i];
        if (i > 0) out += " ; ";
        out += t.name + "(";
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            if (j > 0) out += ",";
            out += t.columns[j].name;
        }
        out += ")";
    }
    return out;
}

std::vector<Token> serialize_prompt(std::string_view question, const Schema& schema, std::string_view lang,
                                    const TokenizerConfig& config) {
    std::vector<Token> out = tokenize(lang);
    out.push_back(kSep);
    const auto q = tokenize(question);
    out.insert(out.end(), q.begin(), q.end());
    out.push_back(kSep);
    const auto s = tokenize(serialize_schema(schema));
    out.insert(out.end(), s.begin(), s.end());
    out.push_back(kSep);
    out.push_back(kBos);
    if (out.size() > config.max_prompt_len) {
        throw LengthError("prompt of " + std::to_string(out.size()) + " tokens exceeds the budget of " +
                          std::to_string(config.max_prompt_len) + " (db " + schema.db_id + ")");
    }
    return out;
}

} // namespace sqlgrpo::policy
