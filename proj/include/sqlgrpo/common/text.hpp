// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace sqlgrpo {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string trim(std::string_view s);

/// Decodes UTF-8 into code points; invalid sequences become U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);

/// Serializes JSON, replacing invalid UTF-8 in strings (model output) with
/// U+FFFD instead of throwing.
std::string dump_json(const nlohmann::json& j, int indent = -1);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace sqlgrpo
