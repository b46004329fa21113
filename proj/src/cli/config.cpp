// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/cli/config.hpp"

#include "sqlgrpo/common/text.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace sqlgrpo::cli {

using nlohmann::json;

namespace {

std::string where(const char* section, const char* key) { return std::string(section) + "." + key; }

template <class T>
T convert(const json& v, const std::string& name) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ValidationError(name + ": expected true or false");
        return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ValidationError(name + ": expected a string");
        return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ValidationError(name + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ValidationError(name + ": expected a finite number");
        return d;
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ValidationError(name + ": expected an integer");
        if (v.is_number_unsigned()) {
            const auto u = v.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
                throw ValidationError(name + ": value out of range");
            }
            return static_cast<T>(u);
        }
        const auto i = v.get<std::int64_t>();
        if (i < 0 && std::is_unsigned_v<T>) throw ValidationError(name + ": expected a non-negative integer");
        if constexpr (std::is_signed_v<T>) {
            if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max()) {
                throw ValidationError(name + ": value out of range");
            }
        }
        return static_cast<T>(i);
    } else {
        static_assert(std::is_same_v<T, std::vector<int>>);
        if (!v.is_array()) throw ValidationError(name + ": expected an array of integers");
        std::vector<int> out;
        for (const auto& e : v) out.push_back(convert<int>(e, name));
        return out;
    }
}

struct Field {
    const char* section;
    const char* key;
    std::function<json(const RunConfig&)> get;
    std::function<void(RunConfig&, const json&)> set;
};

/// `access` is a generic lambda returning a reference to the member.
template <class Access>
Field field(const char* section, const char* key, Access access) {
    using T = std::remove_reference_t<decltype(access(std::declval<RunConfig&>()))>;
    return {section, key, [access](const RunConfig& c) { return json(access(c)); },
            [access, section, key](RunConfig& c, const json& v) { access(c) = convert<T>(v, where(section, key)); }};
}

const char* pair_languages_name(encoder::PairLanguages p) {
    return p == encoder::PairLanguages::All ? "all" : "en_pivot";
}

encoder::PairLanguages pair_languages_from(const std::string& s) {
    if (s == "all") return encoder::PairLanguages::All;
    if (s == "en_pivot") return encoder::PairLanguages::EnPivot;
    throw ValidationError("encoder.pair_languages must be 'all' or 'en_pivot', got '" + s + "'");
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = [] {
        std::vector<Field> f;
        f.push_back(field("data", "seed", [](auto& c) -> auto& { return c.data.seed; }));
        f.push_back(field("data", "schemas", [](auto& c) -> auto& { return c.data.schemas; }));
        f.push_back(field("data", "questions", [](auto& c) -> auto& { return c.data.questions_per_schema; }));

        f.push_back(field("encoder", "ngram_sizes", [](auto& c) -> auto& { return c.encoder.model.ngram_sizes; }));
        f.push_back(field("encoder", "buckets", [](auto& c) -> auto& { return c.encoder.model.buckets; }));
        f.push_back(field("encoder", "d_enc", [](auto& c) -> auto& { return c.encoder.model.d_enc; }));
        f.push_back(field("encoder", "hidden", [](auto& c) -> auto& { return c.encoder.model.hidden; }));
        f.push_back(field("encoder", "d_out", [](auto& c) -> auto& { return c.encoder.model.d_out; }));
        f.push_back(field("encoder", "dropout", [](auto& c) -> auto& { return c.encoder.model.dropout; }));
        f.push_back(field("encoder", "epochs", [](auto& c) -> auto& { return c.encoder.train.epochs; }));
        f.push_back(field("encoder", "batch_size", [](auto& c) -> auto& { return c.encoder.train.batch_size; }));
        f.push_back(field("encoder", "lr", [](auto& c) -> auto& { return c.encoder.train.lr; }));
        f.push_back(field("encoder", "warmup_steps", [](auto& c) -> auto& { return c.encoder.train.warmup_steps; }));
        f.push_back(field("encoder", "weight_decay", [](auto& c) -> auto& { return c.encoder.train.weight_decay; }));
        f.push_back(field("encoder", "margin", [](auto& c) -> auto& { return c.encoder.train.margin; }));
        f.push_back(field("encoder", "hard_fraction", [](auto& c) -> auto& { return c.encoder.mining.hard_fraction; }));
        f.push_back({"encoder", "pair_languages",
                     [](const RunConfig& c) { return json(pair_languages_name(c.encoder.mining.pair_languages)); },
                     [](RunConfig& c, const json& v) {
                         c.encoder.mining.pair_languages =
                             pair_languages_from(convert<std::string>(v, "encoder.pair_languages"));
                     }});
        f.push_back(field("encoder", "sql_positives", [](auto& c) -> auto& { return c.encoder.mining.sql_positives; }));
        f.push_back(
            field("encoder", "negatives_per_pair", [](auto& c) -> auto& { return c.encoder.negatives_per_pair; }));
        f.push_back(field("encoder", "seed", [](auto& c) -> auto& { return c.encoder.train.seed; }));

        f.push_back(field("policy", "layers", [](auto& c) -> auto& { return c.policy.layers; }));
        f.push_back(field("policy", "d_model", [](auto& c) -> auto& { return c.policy.d_model; }));
        f.push_back(field("policy", "heads", [](auto& c) -> auto& { return c.policy.heads; }));
        f.push_back(field("policy", "d_ff", [](auto& c) -> auto& { return c.policy.d_ff; }));
        f.push_back(field("policy", "max_context", [](auto& c) -> auto& { return c.policy.max_context; }));
        f.push_back(
            field("policy", "max_prompt_len", [](auto& c) -> auto& { return c.policy.tokenizer.max_prompt_len; }));
        f.push_back(field("policy", "max_gen_len", [](auto& c) -> auto& { return c.policy.tokenizer.max_gen_len; }));
        f.push_back(field("policy", "seed", [](auto& c) -> auto& { return c.policy_seed; }));

        f.push_back(field("sft", "epochs", [](auto& c) -> auto& { return c.sft.epochs; }));
        f.push_back(field("sft", "batch_size", [](auto& c) -> auto& { return c.sft.batch_size; }));
        f.push_back(field("sft", "lr", [](auto& c) -> auto& { return c.sft.lr; }));
        f.push_back(field("sft", "warmup_steps", [](auto& c) -> auto& { return c.sft.warmup_steps; }));
        f.push_back(field("sft", "weight_decay", [](auto& c) -> auto& { return c.sft.weight_decay; }));
        f.push_back(field("sft", "clip_norm", [](auto& c) -> auto& { return c.sft.clip_norm; }));
        f.push_back(field("sft", "max_steps", [](auto& c) -> auto& { return c.sft.max_steps; }));
        f.push_back(field("sft", "seed", [](auto& c) -> auto& { return c.sft.seed; }));

        f.push_back(field("grpo", "group_size", [](auto& c) -> auto& { return c.grpo.group_size; }));
        f.push_back(field("grpo", "beta", [](auto& c) -> auto& { return c.grpo.beta; }));
        f.push_back(field("grpo", "batch_prompts", [](auto& c) -> auto& { return c.grpo.batch_prompts; }));
        f.push_back(field("grpo", "steps", [](auto& c) -> auto& { return c.grpo.steps; }));
        f.push_back(field("grpo", "lr", [](auto& c) -> auto& { return c.grpo.lr; }));
        f.push_back(field("grpo", "warmup_steps", [](auto& c) -> auto& { return c.grpo.warmup_steps; }));
        f.push_back(field("grpo", "temperature", [](auto& c) -> auto& { return c.grpo.temperature; }));
        f.push_back(field("grpo", "advantage_eps", [](auto& c) -> auto& { return c.grpo.advantage_eps; }));
        f.push_back(field("grpo", "clip_norm", [](auto& c) -> auto& { return c.grpo.clip_norm; }));
        f.push_back(field("grpo", "rolling_window", [](auto& c) -> auto& { return c.grpo.rolling_window; }));
        f.push_back(field("grpo", "snapshot_every", [](auto& c) -> auto& { return c.snapshot_every; }));
        f.push_back(field("grpo", "seed", [](auto& c) -> auto& { return c.grpo.seed; }));
        f.push_back({"grpo", "sem_mode", [](const RunConfig& c) { return json(reward::to_string(c.grpo.sem_mode)); },
                     [](RunConfig& c, const json& v) {
                         c.grpo.sem_mode = reward::sem_mode_from_string(convert<std::string>(v, "grpo.sem_mode"));
                     }});

        f.push_back(field("rewards", "w_exec", [](auto& c) -> auto& { return c.grpo.weights.exec; }));
        f.push_back(field("rewards", "w_syntax", [](auto& c) -> auto& { return c.grpo.weights.syntax; }));
        f.push_back(field("rewards", "w_schema", [](auto& c) -> auto& { return c.grpo.weights.schema; }));
        f.push_back(field("rewards", "w_sem", [](auto& c) -> auto& { return c.grpo.weights.sem; }));

        f.push_back(field("eval", "states", [](auto& c) -> auto& { return c.eval.states; }));
        f.push_back(field("eval", "seed", [](auto& c) -> auto& { return c.eval.seed; }));
        f.push_back(field("eval", "state_size", [](auto& c) -> auto& { return c.eval.state_size; }));
        f.push_back(field("eval", "max_regenerations", [](auto& c) -> auto& { return c.eval.max_regenerations; }));
        return f;
    }();
    return all;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields()) {
        if (section == f.section && key == f.key) return &f;
    }
    return nullptr;
}

bool known_section(const std::string& section) {
    for (const auto& f : fields()) {
        if (section == f.section) return true;
    }
    return false;
}

// ---- TOML subset --------------------------------------------------------

class ValueParser {
public:
    explicit ValueParser(std::string_view s) : s_(s) {}

    json parse_all() {
        json v = value();
        skip_ws();
        if (pos_ != s_.size()) throw ValidationError("unexpected text after value");
        return v;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    json value() {
        skip_ws();
        if (pos_ == s_.size()) throw ValidationError("missing value");
        const char c = s_[pos_];
        if (c == '"') return string();
        if (c == '[') return array();
        std::size_t end = pos_;
        while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' && s_[end] != '\t') ++end;
        const std::string tok(s_.substr(pos_, end - pos_));
        pos_ = end;
        return scalar(tok);
    }

    static json scalar(const std::string& tok) {
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (tok.empty()) throw ValidationError("missing value");
        const std::size_t digits_from = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
        const bool integer = tok.size() > digits_from &&
                             tok.find_first_not_of("0123456789", digits_from) == std::string::npos;
        try {
            std::size_t used = 0;
            if (integer) {
                if (tok[0] == '-') {
                    const long long v = std::stoll(tok, &used);
                    return static_cast<std::int64_t>(v);
                }
                const unsigned long long v = std::stoull(tok, &used);
                return static_cast<std::uint64_t>(v);
            }
            const double v = std::stod(tok, &used);
            if (used == tok.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        throw ValidationError("cannot parse value '" + tok + "'");
    }

    json string() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ == s_.size()) break;
                const char e = s_[pos_++];
                switch (e) {
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                default: throw ValidationError(std::string("unsupported escape \\") + e);
                }
            }
            out.push_back(c);
        }
        if (pos_ == s_.size()) throw ValidationError("unterminated string");
        ++pos_;
        return out;
    }

    json array() {
        ++pos_;
        json out = json::array();
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return out;
        }
        while (true) {
            json v = value();
            if (v.is_array()) throw ValidationError("nested arrays are not supported");
            out.push_back(std::move(v));
            skip_ws();
            if (pos_ == s_.size()) throw ValidationError("unterminated array");
            if (s_[pos_] == ']') {
                ++pos_;
                return out;
            }
            if (s_[pos_] != ',') throw ValidationError("expected ',' or ']' in array");
            ++pos_;
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

/// Drops a # comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && in_string) {
            ++i;
        } else if (line[i] == '"') {
            in_string = !in_string;
        } else if (line[i] == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

bool bare_key(const std::string& k) {
    return !k.empty() && k.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_") == std::string::npos;
}

void assign(RunConfig& config, const std::string& section, const std::string& key, const json& value) {
    const Field* f = find_field(section, key);
    if (f == nullptr) {
        if (!known_section(section)) throw ValidationError("unknown section [" + section + "]");
        throw ValidationError("unknown key " + section + "." + key);
    }
    f->set(config, value);
}

} // namespace

RunConfig default_run_config() {
    RunConfig c;
    c.encoder.model = encoder::EncoderConfig{};
    c.encoder.train.epochs = 2;
    c.encoder.train.batch_size = 32;
    c.encoder.train.lr = 5e-3;
    c.encoder.train.warmup_steps = 20;
    c.encoder.train.weight_decay = 0.01;
    c.encoder.train.margin = 0.5;
    c.encoder.mining.hard_fraction = 0.5;
    c.encoder.mining.sql_positives = true;
    c.encoder.negatives_per_pair = 8;

    c.policy.layers = 2;
    c.policy.d_model = 64;
    c.policy.heads = 4;
    c.policy.d_ff = 256;

    c.sft.epochs = 8;
    c.sft.batch_size = 16;
    c.sft.lr = 3e-3;
    c.sft.warmup_steps = 20;

    c.grpo.group_size = 8;
    c.grpo.batch_prompts = 4;
    c.grpo.steps = 300;
    c.grpo.lr = 1e-4;
    c.grpo.warmup_steps = 10;
    c.grpo.beta = 0.02;
    c.grpo.sem_mode = reward::SemMode::Sql;
    return c;
}

void RunConfig::validate() const {
    if (encoder.negatives_per_pair == 0) throw ValidationError("encoder.negatives_per_pair must be at least 1");
    if (encoder.train.epochs < 1) throw ValidationError("encoder.epochs must be at least 1");
    if (encoder.train.batch_size == 0) throw ValidationError("encoder.batch_size must be positive");
    if (!(encoder.model.dropout >= 0.0 && encoder.model.dropout < 1.0)) {
        throw ValidationError("encoder.dropout must lie in [0, 1)");
    }
    if (!(encoder.mining.hard_fraction >= 0.0 && encoder.mining.hard_fraction <= 1.0)) {
        throw ValidationError("encoder.hard_fraction must lie in [0, 1]");
    }
    if (sft.epochs < 1 || sft.batch_size == 0) throw ValidationError("sft.epochs and sft.batch_size must be positive");
    if (grpo.steps < 0) throw ValidationError("grpo.steps must be non-negative");
    if (grpo.batch_prompts == 0) throw ValidationError("grpo.batch_prompts must be positive");
    if (snapshot_every < 0) throw ValidationError("grpo.snapshot_every must be non-negative");
    if (eval.states == 0) throw ValidationError("eval.states must be at least 1");
    policy.validate();
    grpo.validate();
}

void apply_config_text(RunConfig& config, const std::string& text) {
    std::string section;
    std::set<std::string> seen;
    std::size_t ln = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = trim(strip_comment(text.substr(start, end - start)));
        start = end + 1;
        ++ln;
        if (line.empty()) continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']') throw ValidationError("malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                if (!known_section(section)) throw ValidationError("unknown section [" + section + "]");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) throw ValidationError("expected key = value");
            const std::string key = trim(line.substr(0, eq));
            if (!bare_key(key)) throw ValidationError("malformed key '" + key + "'");
            if (section.empty()) throw ValidationError("key " + key + " outside any section");
            if (!seen.insert(section + "." + key).second) throw ValidationError("duplicate key " + section + "." + key);
            assign(config, section, key, ValueParser(line.substr(eq + 1)).parse_all());
        } catch (const ValidationError& e) {
            throw ValidationError("config line " + std::to_string(ln) + ": " + e.what());
        }
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig c = default_run_config();
    apply_config_text(c, text);
    return c;
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    const std::size_t dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ValidationError("override must look like section.key=value, got '" + assignment + "'");
    }
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    try {
        assign(config, section, key, ValueParser(assignment.substr(eq + 1)).parse_all());
    } catch (const ValidationError& e) {
        throw ValidationError("override '" + assignment + "': " + e.what());
    }
}

json to_json(const RunConfig& c) {
    json out = json::object();
    for (const auto& f : fields()) out[f.section][f.key] = f.get(c);
    return out;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    RunConfig c = default_run_config();
    for (const auto& [section, body] : j.items()) {
        if (!known_section(section)) throw ValidationError("unknown section [" + section + "]");
        if (!body.is_object()) throw ValidationError("section [" + section + "] must be an object");
        for (const auto& [key, value] : body.items()) assign(c, section, key, value);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    const std::string text = read_file(path);
    if (path.ends_with(".json")) {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw FormatError("manifest " + path + ": " + e.what());
        }
        if (!j.contains("config")) throw ValidationError("manifest " + path + " has no config");
        return config_from_json(j.at("config"));
    }
    return parse_config(text);
}

} // namespace sqlgrpo::cli
