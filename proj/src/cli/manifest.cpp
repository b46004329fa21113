// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/cli/manifest.hpp"

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/common/text.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <filesystem>

namespace sqlgrpo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sha1_raw(const std::string& bytes) {
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    return std::string(reinterpret_cast<const char*>(digest), SHA_DIGEST_LENGTH);
}

std::string hex(const std::string& raw) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (const unsigned char c : raw) {
        out.push_back(kDigits[c >> 4]);
        out.push_back(kDigits[c & 15]);
    }
    return out;
}

std::string object_hash_raw(const std::string& type, const std::string& body) {
    return sha1_raw(type + " " + std::to_string(body.size()) + std::string(1, '\0') + body);
}

std::string hash_raw(const fs::path& p, const std::vector<std::string>& skip) {
    if (fs::is_regular_file(p)) return object_hash_raw("blob", read_file(p.string()));
    if (!fs::is_directory(p)) throw ValidationError("no such file or directory: " + p.string());
    struct Entry {
        std::string name;
        bool dir;
        std::string id;
    };
    std::vector<Entry> entries;
    for (const auto& e : fs::directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
        if (e.is_directory()) {
            entries.push_back({name, true, hash_raw(e.path(), {})});
        } else if (e.is_regular_file()) {
            entries.push_back({name, false, hash_raw(e.path(), {})});
        }
    }
    // Git orders tree entries as if directory names ended in '/'.
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return (a.dir ? a.name + "/" : a.name) < (b.dir ? b.name + "/" : b.name);
    });
    std::string body;
    for (const auto& e : entries) {
        body += (e.dir ? "40000 " : "100644 ") + e.name + std::string(1, '\0') + e.id;
    }
    return object_hash_raw("tree", body);
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("manifest has no '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest field '") + key + "': " + e.what());
    }
}

} // namespace

std::string git_blob_hash(const std::string& content) { return hex(object_hash_raw("blob", content)); }

std::string git_hash_path(const std::string& path, const std::vector<std::string>& skip) {
    return hex(hash_raw(fs::path(path), skip));
}

json to_json(const Manifest& m) {
    return {{"verb", m.verb},         {"argv", m.argv},       {"config", m.config},   {"seeds", m.seeds},
            {"paths", m.paths},       {"params", m.params},   {"inputs", m.inputs},   {"outputs", m.outputs},
            {"metrics", m.metrics},   {"notes", m.notes}};
}

Manifest manifest_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("manifest must be a JSON object");
    Manifest m;
    m.verb = field<std::string>(j, "verb");
    m.argv = field<std::vector<std::string>>(j, "argv");
    m.config = field<json>(j, "config");
    m.seeds = field<json>(j, "seeds");
    m.paths = field<std::map<std::string, std::string>>(j, "paths");
    m.params = field<std::map<std::string, std::string>>(j, "params");
    m.inputs = field<std::map<std::string, std::string>>(j, "inputs");
    m.outputs = field<std::map<std::string, std::string>>(j, "outputs");
    m.metrics = field<json>(j, "metrics");
    m.notes = field<std::vector<std::string>>(j, "notes");
    return m;
}

void save_manifest(const Manifest& m, const std::string& path) { write_file(path, dump_json(to_json(m), 2) + "\n"); }

Manifest load_manifest(const std::string& path) {
    try {
        return manifest_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw FormatError("manifest " + path + ": " + e.what());
    }
}

} // namespace sqlgrpo::cli
