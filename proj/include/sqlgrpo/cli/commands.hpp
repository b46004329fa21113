// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sqlgrpo::cli {

/// File every output-directory verb leaves next to its results.
inline constexpr const char* kManifestName = "manifest.json";

/// Runs one verb; `args` excludes the program name. Returns 0 on success, 1
/// on a validation or usage error (usage errors print the verb's flag table),
/// 2 on a runtime error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sqlgrpo::cli
