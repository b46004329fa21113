// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>

namespace sqlgrpo {

/// Report order of the supported languages.
inline constexpr std::array<std::string_view, 7> kLanguages = {"vi", "es", "ja", "de", "en", "zh", "fr"};

bool is_language(std::string_view tag);

/// One question in one language. Parallel translations share `id`.
struct Example {
    std::string id;
    std::string db_id;
    std::string lang;
    std::string question;
    std::string gold_sql;
};

} // namespace sqlgrpo
