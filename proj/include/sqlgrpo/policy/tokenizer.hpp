// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/db/schema.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgrpo::policy {

/// Byte-level vocabulary: ids 0..255 are raw bytes, then four specials.
using Token = std::int64_t;
inline constexpr Token kPad = 256;
inline constexpr Token kBos = 257;
inline constexpr Token kEos = 258;
inline constexpr Token kSep = 259;
inline constexpr std::size_t kVocabSize = 260;

struct TokenizerConfig {
    std::size_t max_prompt_len = 384;
    std::size_t max_gen_len = 128;
};

/// A prompt or completion exceeds its length budget.
class LengthError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

std::vector<Token> tokenize(std::string_view text);
/// Concatenates byte tokens; special tokens are dropped.
std::string detokenize(const std::vector<Token>& tokens);

/// "t1(c1,c2) ; t2(c3)" in schema order.
std::string serialize_schema(const Schema& schema);

/// lang SEP question SEP schema SEP BOS. Throws LengthError past
/// max_prompt_len.
std::vector<Token> serialize_prompt(std::string_view question, const Schema& schema, std::string_view lang,
                                    const TokenizerConfig& config);

} // namespace sqlgrpo::policy
