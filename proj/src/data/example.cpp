// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/data/example.hpp"

#include <algorithm>

namespace sqlgrpo {

bool is_language(std::string_view tag) {
    return std::find(kLanguages.begin(), kLanguages.end(), tag) != kLanguages.end();
}

} // namespace sqlgrpo
