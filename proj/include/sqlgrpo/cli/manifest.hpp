// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace sqlgrpo::cli {

/// Git object id of a byte string stored as a blob: SHA-1 over
/// "blob <size>\0" followed by the bytes, as lowercase hex.
std::string git_blob_hash(const std::string& content);

/// Git object id of a file (its blob) or a directory (a tree of its regular
/// files and subdirectories, names sorted as git sorts them). Files named in
/// `skip` are left out at the top level.
std::string git_hash_path(const std::string& path, const std::vector<std::string>& skip = {});

/// Everything needed to re-execute one run and check its results. Paths are
/// relative to the run's working directory.
struct Manifest {
    std::string verb;
    std::vector<std::string> argv;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    std::map<std::string, std::string> paths;   // flag -> path, inputs and the output
    std::map<std::string, std::string> params;  // flag -> non-path value
    std::map<std::string, std::string> inputs;  // flag -> content hash
    std::map<std::string, std::string> outputs; // name -> content hash
    nlohmann::json metrics = nlohmann::json::object();
    std::vector<std::string> notes;
};

nlohmann::json to_json(const Manifest& m);
/// Throws FormatError on a missing or mistyped field.
Manifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

} // namespace sqlgrpo::cli
