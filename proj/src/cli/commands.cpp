// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/cli/commands.hpp"

#include "sqlgrpo/cli/config.hpp"
#include "sqlgrpo/cli/manifest.hpp"
#include "sqlgrpo/cli/pipeline.hpp"
#include "sqlgrpo/common/text.hpp"
#include "sqlgrpo/data/corpus.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

namespace sqlgrpo::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kModelName = "model.ckpt";

/// Bad flag combination; reported with the verb's flag table.
class UsageError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct Common {
    std::string workdir = ".";
    std::string config;
    std::vector<std::string> overrides;
};

/// One verb invocation: resolved configuration and the manifest being built.
struct Run {
    fs::path workdir;
    RunConfig config;
    Manifest manifest;

    std::string at(const std::string& rel) const { return (workdir / rel).string(); }

    void input(const std::string& flag, const std::string& rel) {
        manifest.paths[flag] = rel;
        manifest.inputs[flag] = git_hash_path(at(rel));
    }

    void param(const std::string& flag, const std::string& value) { manifest.params[flag] = value; }

    /// Validates and materializes the configuration; call once flags are applied.
    void resolve() {
        config.validate();
        manifest.config = to_json(config);
    }

    fs::path make_out_dir(const std::string& rel) {
        const fs::path p = at(rel);
        fs::create_directories(p);
        manifest.paths["out"] = rel;
        return p;
    }

    void finish_dir(const fs::path& out) {
        manifest.outputs["out"] = git_hash_path(out.string(), {kManifestName});
        save_manifest(manifest, (out / kManifestName).string());
    }

    /// Single-file results: the file plus <file>.manifest.json beside it.
    void finish_file(const std::string& rel, const std::string& content) {
        const fs::path p = at(rel);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_file(p.string(), content);
        manifest.paths["out"] = rel;
        manifest.outputs["out"] = git_blob_hash(content);
        save_manifest(manifest, p.string() + ".manifest.json");
    }
};

Run start(const std::string& verb, const std::vector<std::string>& args, const Common& c) {
    Run r;
    r.workdir = c.workdir;
    if (!fs::is_directory(r.workdir)) throw ValidationError("no working directory " + c.workdir);
    r.config = c.config.empty() ? default_run_config() : load_config(r.at(c.config));
    for (const auto& s : c.overrides) apply_override(r.config, s);
    r.manifest.verb = verb;
    r.manifest.argv = args;
    return r;
}

std::string model_path(const Run& r, const std::string& dir) { return (fs::path(r.at(dir)) / kModelName).string(); }

void write_lines(const fs::path& path, const std::vector<json>& rows) {
    std::string text;
    for (const auto& row : rows) text += dump_json(row) + "\n";
    write_file(path.string(), text);
}

json to_json(const encoder::TripletMetrics& m) {
    return {{"loss", m.loss},
            {"margin_satisfaction", m.margin_satisfaction},
            {"pos_cosine", m.pos_cosine},
            {"neg_cosine", m.neg_cosine},
            {"count", m.count}};
}

json score_json(const eval::LanguageScore& s) {
    return {{"lang", s.lang}, {"count", s.count}, {"exec_acc", s.exec_acc}, {"sem_acc", s.sem_acc}};
}

// ---- verbs ---------------------------------------------------------------

struct MkdataArgs {
    std::string out = "data";
    CLI::Option* seed = nullptr;
    CLI::Option* schemas = nullptr;
    CLI::Option* questions = nullptr;
    std::uint64_t seed_v = 0;
    std::size_t schemas_v = 0, questions_v = 0;
};

void mkdata(Run& r, const MkdataArgs& a, std::ostream& out) {
    if (a.seed->count() > 0) r.config.data.seed = a.seed_v;
    if (a.schemas->count() > 0) r.config.data.schemas = a.schemas_v;
    if (a.questions->count() > 0) r.config.data.questions_per_schema = a.questions_v;
    r.resolve();
    r.manifest.seeds = {{"data", r.config.data.seed}};
    const data::Corpus corpus = data::generate_corpus(r.config.data);
    const fs::path dir = r.make_out_dir(a.out);
    data::write_corpus(corpus, dir.string());
    const DataDir check = load_data_dir(dir.string());
    r.manifest.metrics = {{"schemas", check.catalog.schemas.size()},
                          {"train_examples", check.train.examples.size()},
                          {"dev_examples", check.dev.examples.size()}};
    r.finish_dir(dir);
    out << "wrote " << check.train.examples.size() << " train and " << check.dev.examples.size()
        << " dev examples over " << check.catalog.schemas.size() << " schemas to " << a.out << "\n";
}

struct MkstatesArgs {
    std::string schema;
    std::string out = "states";
    std::size_t count = 4;
    std::uint64_t seed = 1;
    CLI::Option* size = nullptr;
    std::size_t size_v = 0;
};

void mkstates(Run& r, const MkstatesArgs& a, std::ostream& out) {
    const std::size_t size = a.size->count() > 0 ? a.size_v : r.config.eval.state_size;
    r.resolve();
    r.input("schema", a.schema);
    r.param("count", std::to_string(a.count));
    r.param("seed", std::to_string(a.seed));
    r.param("size", std::to_string(size));
    r.manifest.seeds = {{"states", a.seed}};
    const Schema schema = load_schema(r.at(a.schema));
    const fs::path dir = r.make_out_dir(a.out);
    json rows = json::object();
    for (std::size_t i = 0; i < a.count; ++i) {
        const std::uint64_t seed = a.seed + i;
        const DatabaseState st = generate_random_state(schema, seed, size);
        const std::string name = schema.db_id + ".state." + std::to_string(seed) + ".json";
        save_state(st, (dir / name).string());
        json tables = json::object();
        for (const auto& [t, rs] : st.rows) tables[t] = rs.size();
        rows[name] = tables;
    }
    r.manifest.metrics = {{"rows", rows}};
    r.finish_dir(dir);
    out << "wrote " << a.count << " states of " << schema.db_id << " to " << a.out << "\n";
}

struct EncoderArgs {
    std::string data = "data";
    std::string out = "encoder";
    CLI::Option* seed = nullptr;
    std::uint64_t seed_v = 0;
};

void train_encoder_verb(Run& r, const EncoderArgs& a, std::ostream& out) {
    if (a.seed->count() > 0) r.config.encoder.train.seed = a.seed_v;
    r.resolve();
    r.input("data", a.data);
    r.manifest.seeds = {{"encoder", r.config.encoder.train.seed}};
    const DataDir d = load_data_dir(r.at(a.data));
    const auto train = training_triples(d.train.examples, r.config.encoder);
    const auto heldout = heldout_triples(d.dev.examples, r.config.encoder);
    encoder::Encoder enc(r.config.encoder.model, r.config.encoder.train.seed);
    const auto logs = encoder::train_encoder(enc, train, heldout, r.config.encoder.train);

    const fs::path dir = r.make_out_dir(a.out);
    enc.save((dir / kModelName).string());
    std::vector<json> rows;
    for (const auto& l : logs) rows.push_back({{"epoch", l.epoch}, {"train_loss", l.train_loss}, {"heldout", to_json(l.heldout)}});
    write_lines(dir / "log.jsonl", rows);
    r.manifest.metrics = {{"train_triples", train.size()},
                          {"heldout_triples", heldout.size()},
                          {"epochs", rows},
                          {"heldout", to_json(logs.back().heldout)}};
    r.finish_dir(dir);
    const auto& h = logs.back().heldout;
    out << "held-out margin satisfaction " << h.margin_satisfaction << ", cosine pos " << h.pos_cosine << " neg "
        << h.neg_cosine << " over " << h.count << " triples\n";
}

struct EmbedArgs {
    std::string encoder;
    std::string text;
    std::string out;
};

void embed_verb(Run& r, const EmbedArgs& a, std::ostream& out) {
    r.resolve();
    r.input("encoder", a.encoder);
    r.param("text", a.text);
    const encoder::Encoder enc = encoder::Encoder::load(model_path(r, a.encoder));
    const std::vector<double> v = enc.embed(a.text);
    const json result = {{"text", a.text}, {"embedding", v}};
    r.manifest.metrics = result;
    out << dump_json(result) << "\n";
    if (!a.out.empty()) r.finish_file(a.out, dump_json(result) + "\n");
}

struct SftArgs {
    std::string data = "data";
    std::string out = "sft";
    CLI::Option* seed = nullptr;
    std::uint64_t seed_v = 0;
};

void sft_verb(Run& r, const SftArgs& a, std::ostream& out) {
    if (a.seed->count() > 0) r.config.sft.seed = a.seed_v;
    r.resolve();
    r.input("data", a.data);
    r.manifest.seeds = {{"policy", r.config.policy_seed}, {"sft", r.config.sft.seed}};
    const DataDir d = load_data_dir(r.at(a.data));
    const auto train = sft_examples(d.train.examples, d.catalog, r.config.policy.tokenizer);
    const auto dev = sft_examples(d.dev.examples, d.catalog, r.config.policy.tokenizer);
    policy::Policy pol(r.config.policy, r.config.policy_seed);
    const auto logs = policy::sft_train(pol, train, dev, r.config.sft);
    pol.metadata() = {{"stage", "sft"}, {"sft", r.manifest.config.at("sft")}};

    const fs::path dir = r.make_out_dir(a.out);
    pol.save((dir / kModelName).string());
    std::vector<json> rows;
    for (const auto& l : logs) {
        rows.push_back({{"epoch", l.epoch}, {"steps", l.steps}, {"train_loss", l.train_loss}, {"eval_loss", l.eval_loss}});
    }
    write_lines(dir / "log.jsonl", rows);
    r.manifest.metrics = {{"epochs", rows}};
    r.finish_dir(dir);
    out << "SFT " << logs.back().steps << " steps, dev loss " << logs.back().eval_loss << "\n";
}

struct GrpoArgs {
    std::string data = "data";
    std::string init;
    std::string encoder;
    std::string out = "grpo";
    bool no_contrastive = false;
    CLI::Option* sem_mode = nullptr;
    std::string sem_mode_v;
    CLI::Option* seed = nullptr;
    std::uint64_t seed_v = 0;
    CLI::Option* steps = nullptr;
    std::int64_t steps_v = 0;
};

void train_grpo_verb(Run& r, const GrpoArgs& a, std::ostream& out) {
    if (a.sem_mode->count() > 0) r.config.grpo.sem_mode = reward::sem_mode_from_string(a.sem_mode_v);
    if (a.seed->count() > 0) r.config.grpo.seed = a.seed_v;
    if (a.steps->count() > 0) r.config.grpo.steps = a.steps_v;
    if (a.no_contrastive) {
        if (!a.encoder.empty()) throw UsageError("--no-contrastive trains without an encoder; drop --encoder");
        r.config.grpo.weights.sem = 0.0;
    }
    const bool use_encoder = r.config.grpo.weights.sem > 0.0;
    if (use_encoder && a.encoder.empty()) {
        throw UsageError("rewards.w_sem > 0 needs --encoder (or pass --no-contrastive)");
    }
    policy::Policy init = policy::Policy::load(model_path(r, a.init));
    r.config.policy = init.config();
    r.resolve();
    r.input("data", a.data);
    r.input("init", a.init);
    std::unique_ptr<encoder::Encoder> enc;
    if (use_encoder) {
        r.input("encoder", a.encoder);
        enc = std::make_unique<encoder::Encoder>(encoder::Encoder::load(model_path(r, a.encoder)));
    }
    r.manifest.seeds = {{"grpo", r.config.grpo.seed}};
    if (use_encoder && r.config.grpo.sem_mode == reward::SemMode::Question) {
        r.manifest.notes.push_back(question_mode_note());
    }

    const DataDir d = load_data_dir(r.at(a.data));
    const GrpoPromptSet prompts(d.train.examples, d.catalog, init.config().tokenizer);
    const fs::path dir = r.make_out_dir(a.out);
    grpo::GrpoConfig gc = r.config.grpo;
    gc.dump_dir = (dir / "divergence").string();
    fs::create_directories(gc.dump_dir);
    grpo::GrpoTrainer trainer(init, enc.get(), gc);

    auto banks = state_banks(d.catalog, r.config.eval);
    std::vector<json> snapshots;
    auto snapshot = [&](std::int64_t steps) {
        const double acc = eval::exec_acc(d.dev.examples, greedy_predictor(trainer.policy(), d.catalog), banks);
        snapshots.push_back({{"steps", steps}, {"dev_exec_acc", acc}});
    };
    const std::int64_t every = r.config.snapshot_every;
    if (every > 0) snapshot(0);
    grpo::train(trainer, prompts.prompts(), [&](const grpo::GrpoTrainer& t) {
        const std::int64_t done = t.log().records().back().step + 1;
        if (every > 0 && done % every == 0) snapshot(done);
    });
    std::error_code keep;
    fs::remove(gc.dump_dir, keep);  // fails, keeping the dumps, unless empty

    policy::Policy trained = trainer.policy();
    trained.metadata() = {{"stage", "grpo"},
                          {"sem_mode", reward::to_string(r.config.grpo.sem_mode)},
                          {"w_sem", r.config.grpo.weights.sem},
                          {"notes", r.manifest.notes}};
    trained.save((dir / kModelName).string());
    trainer.log().write_jsonl((dir / "train_log.jsonl").string());
    write_lines(dir / "snapshots.jsonl", snapshots);
    const auto& records = trainer.log().records();
    r.manifest.metrics = {{"steps", records.size()}, {"snapshots", snapshots}};
    if (!records.empty()) r.manifest.metrics["final"] = grpo::to_json(records.back());
    r.finish_dir(dir);
    out << "GRPO " << records.size() << " steps";
    if (!records.empty()) out << ", rolling exec " << records.back().rolling_exec_acc;
    if (!snapshots.empty()) out << ", dev ExecAcc " << snapshots.back().at("dev_exec_acc").get<double>();
    out << "\n";
    for (const auto& n : r.manifest.notes) out << "note: " << n << "\n";
}

struct ScoreArgs {
    std::string schema, db, gold, candidate, question, ref_question, encoder, out;
    CLI::Option* sem_mode = nullptr;
    std::string sem_mode_v;
};

void score_verb(Run& r, const ScoreArgs& a, std::ostream& out) {
    if (a.sem_mode->count() > 0) r.config.grpo.sem_mode = reward::sem_mode_from_string(a.sem_mode_v);
    if (!a.encoder.empty() && a.question.empty()) throw UsageError("--encoder needs --question");
    r.resolve();
    r.input("schema", a.schema);
    r.input("db", a.db);
    r.param("gold", a.gold);
    r.param("candidate", a.candidate);
    if (!a.question.empty()) r.param("question", a.question);
    if (!a.ref_question.empty()) r.param("ref-question", a.ref_question);
    const Schema schema = load_schema(r.at(a.schema));
    const DatabaseState state = load_state(r.at(a.db), schema);
    const reward::GoldContext gold(schema, state, a.gold);
    const reward::Candidate cand = reward::parse_candidate(a.candidate);
    double r_sem = 0.0;
    if (!a.encoder.empty()) {
        r.input("encoder", a.encoder);
        const encoder::Encoder enc = encoder::Encoder::load(model_path(r, a.encoder));
        const std::string& ref = a.ref_question.empty() ? a.question : a.ref_question;
        r_sem = reward::semantic_reward(enc, a.question, ref, r.config.grpo.sem_mode, cand, schema);
    }
    const json bundle = reward::to_json(reward::score(cand, gold, r_sem, r.config.grpo.weights));
    r.manifest.metrics = bundle;
    out << dump_json(bundle) << "\n";
    if (!a.out.empty()) r.finish_file(a.out, dump_json(bundle) + "\n");
}

struct EvalArgs {
    std::string policy;
    std::string data = "data";
    std::string split = "dev";
    std::string arm;
    std::string out = "eval";
};

void eval_verb(Run& r, const EvalArgs& a, std::ostream& out) {
    if (a.split != "dev" && a.split != "train") throw UsageError("--split must be dev or train");
    r.resolve();
    r.input("policy", a.policy);
    r.input("data", a.data);
    const std::string arm = a.arm.empty() ? fs::path(a.policy).filename().string() : a.arm;
    r.param("split", a.split);
    r.param("arm", arm);
    r.manifest.seeds = {{"eval", r.config.eval.seed}};
    const policy::Policy pol = policy::Policy::load(model_path(r, a.policy));
    const DataDir d = load_data_dir(r.at(a.data));
    auto banks = state_banks(d.catalog, r.config.eval);
    const auto& examples = a.split == "dev" ? d.dev.examples : d.train.examples;
    eval::EvalReport report = eval::evaluate(arm, examples, greedy_predictor(pol, d.catalog), banks);
    report.fingerprint = {{"eval", to_json(r.config.eval)}, {"split", a.split}, {"policy", r.manifest.inputs.at("policy")}};
    const json meta = pol.metadata();
    if (meta.contains("notes") && meta.at("notes").is_array()) {
        for (const auto& n : meta.at("notes")) report.notes.push_back(n.get<std::string>());
    }
    r.manifest.notes = report.notes;

    const fs::path dir = r.make_out_dir(a.out);
    write_file((dir / "report.json").string(), dump_json(eval::to_json(report), 2) + "\n");
    const std::string md = eval::render_markdown({report});
    write_file((dir / "report.md").string(), md);
    json langs = json::array();
    for (const auto& s : report.languages) langs.push_back(score_json(s));
    r.manifest.metrics = {{"average", score_json(report.average())}, {"languages", langs}};
    r.finish_dir(dir);
    out << md;
}

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out = "report";
};

void report_verb(Run& r, const ReportArgs& a, std::ostream& out) {
    r.resolve();
    std::vector<eval::EvalReport> runs;
    json averages = json::array();
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
        r.input("inputs#" + std::to_string(i), a.inputs[i]);
        json j;
        try {
            j = json::parse(read_file(r.at(a.inputs[i])));
        } catch (const json::exception& e) {
            throw FormatError("report " + a.inputs[i] + ": " + e.what());
        }
        runs.push_back(eval::eval_report_from_json(j));
        averages.push_back({{"arm", runs.back().arm}, {"average", score_json(runs.back().average())}});
    }
    const fs::path dir = r.make_out_dir(a.out);
    const std::string md = eval::render_markdown(runs);
    write_file((dir / "report.md").string(), md);
    json all = json::array();
    for (const auto& run : runs) all.push_back(eval::to_json(run));
    write_file((dir / "reports.json").string(), dump_json(all, 2) + "\n");
    r.manifest.metrics = {{"runs", averages}};
    r.finish_dir(dir);
    out << md;
}

struct RerunArgs {
    std::string manifest;
    std::string out;
};

/// Re-executes a manifest's verb with its recorded configuration, inputs and
/// parameters into a fresh output, then compares metrics and outputs.
int rerun_verb(const Common& c, const RerunArgs& a, std::ostream& out, std::ostream& err) {
    const fs::path workdir(c.workdir);
    const Manifest m = load_manifest((workdir / a.manifest).string());
    if (m.verb == "rerun") throw ValidationError("cannot replay a replay");
    auto orig_out = m.paths.find("out");
    if (orig_out == m.paths.end()) throw ValidationError("manifest records no output");
    std::string target = a.out.empty() ? orig_out->second + ".rerun" : a.out;
    for (const auto& [flag, hash] : m.inputs) {
        const std::string now = git_hash_path((workdir / m.paths.at(flag)).string());
        if (now != hash) throw ValidationError("input --" + flag + " changed since the recorded run");
    }
    std::vector<std::string> args = {m.verb, "--workdir", c.workdir, "--config", a.manifest};
    for (const auto& [flag, path] : m.paths) {
        if (flag == "out") continue;
        args.push_back("--" + flag.substr(0, flag.find('#')));
        args.push_back(path);
    }
    for (const auto& [flag, value] : m.params) {
        args.push_back("--" + flag);
        args.push_back(value);
    }
    args.push_back("--out");
    args.push_back(target);
    std::ostringstream sink;
    const int code = dispatch(args, sink, err);
    if (code != 0) return code;

    const bool file_output = !fs::is_directory(workdir / target);
    const std::string replay_path =
        file_output ? (workdir / target).string() + ".manifest.json" : (workdir / target / kManifestName).string();
    const Manifest replay = load_manifest(replay_path);
    const bool metrics_same = replay.metrics == m.metrics;
    const bool outputs_same = replay.outputs == m.outputs;
    const json summary = {{"verb", m.verb},
                          {"out", target},
                          {"metrics_identical", metrics_same},
                          {"outputs_identical", outputs_same}};
    out << dump_json(summary) << "\n";
    if (!metrics_same || !outputs_same) {
        err << "replay of " << a.manifest << " diverged from the recorded run\n";
        return 2;
    }
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--workdir", c.workdir, "Directory all other paths are relative to")->capture_default_str();
    sub->add_option("--config", c.config, "TOML config, or a manifest whose config is replayed");
    sub->add_option("--set", c.overrides, "Override one key, e.g. grpo.steps=200 (repeatable)");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) != nullptr || dynamic_cast<const FormatError*>(&e) != nullptr ||
        dynamic_cast<const IntegrityError*>(&e) != nullptr) {
        return 1;
    }
    return 2;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multilingual text-to-SQL with group-relative policy optimization and a contrastive reward",
                 "sqlgrpo"};
    app.require_subcommand(1);
    Common common;

    MkdataArgs mk;
    auto* s_mkdata = app.add_subcommand("mkdata", "Generate the parallel mini-corpus");
    add_common(s_mkdata, common);
    s_mkdata->add_option("--out", mk.out, "Output directory")->capture_default_str();
    mk.seed = s_mkdata->add_option("--seed", mk.seed_v, "Corpus seed (data.seed)");
    mk.schemas = s_mkdata->add_option("--schemas", mk.schemas_v, "Number of schemas (data.schemas)");
    mk.questions = s_mkdata->add_option("--questions", mk.questions_v, "Questions per schema (data.questions)");

    MkstatesArgs ms;
    auto* s_mkstates = app.add_subcommand("mkstates", "Generate seeded random database states for a schema");
    add_common(s_mkstates, common);
    s_mkstates->add_option("--schema", ms.schema, "Schema JSON file")->required();
    s_mkstates->add_option("--out", ms.out, "Output directory")->capture_default_str();
    s_mkstates->add_option("--count", ms.count, "Number of states")->capture_default_str()->check(CLI::PositiveNumber);
    s_mkstates->add_option("--seed", ms.seed, "Seed of the first state")->capture_default_str();
    ms.size = s_mkstates->add_option("--size", ms.size_v, "Rows per table hint (default eval.state_size)");

    EncoderArgs en;
    auto* s_encoder = app.add_subcommand("train-encoder", "Train the contrastive question encoder");
    add_common(s_encoder, common);
    s_encoder->add_option("--data", en.data, "Data directory")->capture_default_str();
    s_encoder->add_option("--out", en.out, "Output directory")->capture_default_str();
    en.seed = s_encoder->add_option("--seed", en.seed_v, "Encoder seed (encoder.seed)");

    EmbedArgs em;
    auto* s_embed = app.add_subcommand("embed", "Print the unit embedding of a text");
    add_common(s_embed, common);
    s_embed->add_option("--encoder", em.encoder, "Encoder directory")->required();
    s_embed->add_option("--text", em.text, "Text to embed")->required();
    s_embed->add_option("--out", em.out, "Also write the result (and its manifest) to this file");

    SftArgs sf;
    auto* s_sft = app.add_subcommand("sft", "Supervised warm start of the policy");
    add_common(s_sft, common);
    s_sft->add_option("--data", sf.data, "Data directory")->capture_default_str();
    s_sft->add_option("--out", sf.out, "Output directory")->capture_default_str();
    sf.seed = s_sft->add_option("--seed", sf.seed_v, "Batch order seed (sft.seed)");

    GrpoArgs gr;
    auto* s_grpo = app.add_subcommand("train-grpo", "Fine-tune a policy with GRPO");
    add_common(s_grpo, common);
    s_grpo->add_option("--data", gr.data, "Data directory")->capture_default_str();
    s_grpo->add_option("--init", gr.init, "Starting policy directory")->required();
    s_grpo->add_option("--encoder", gr.encoder, "Encoder directory (needed when rewards.w_sem > 0)");
    s_grpo->add_option("--out", gr.out, "Output directory")->capture_default_str();
    s_grpo->add_flag("--no-contrastive", gr.no_contrastive, "Drop the semantic reward (w_sem = 0, no encoder)");
    gr.sem_mode = s_grpo->add_option("--sem-mode", gr.sem_mode_v, "question or sql (grpo.sem_mode)")
                      ->check(CLI::IsMember({"question", "sql"}));
    gr.seed = s_grpo->add_option("--seed", gr.seed_v, "Sampling seed (grpo.seed)");
    gr.steps = s_grpo->add_option("--steps", gr.steps_v, "Optimizer steps (grpo.steps)");

    ScoreArgs sc;
    auto* s_score = app.add_subcommand("score", "Print the reward bundle of one candidate");
    add_common(s_score, common);
    s_score->add_option("--schema", sc.schema, "Schema JSON file")->required();
    s_score->add_option("--db", sc.db, "State JSON file")->required();
    s_score->add_option("--gold", sc.gold, "Gold SQL")->required();
    s_score->add_option("--candidate", sc.candidate, "Candidate SQL")->required();
    s_score->add_option("--question", sc.question, "Question (for the semantic reward)");
    s_score->add_option("--ref-question", sc.ref_question, "English reference question (question mode)");
    s_score->add_option("--encoder", sc.encoder, "Encoder directory (enables the semantic reward)");
    sc.sem_mode = s_score->add_option("--sem-mode", sc.sem_mode_v, "question or sql (grpo.sem_mode)")
                      ->check(CLI::IsMember({"question", "sql"}));
    s_score->add_option("--out", sc.out, "Also write the bundle (and its manifest) to this file");

    EvalArgs ev;
    auto* s_eval = app.add_subcommand("eval", "Greedy-decode a split and report ExecAcc / SemAcc per language");
    add_common(s_eval, common);
    s_eval->add_option("--policy", ev.policy, "Policy directory")->required();
    s_eval->add_option("--data", ev.data, "Data directory")->capture_default_str();
    s_eval->add_option("--split", ev.split, "dev or train")->capture_default_str();
    s_eval->add_option("--arm", ev.arm, "Arm name in the report (default: policy directory name)");
    s_eval->add_option("--out", ev.out, "Output directory")->capture_default_str();

    ReportArgs rp;
    auto* s_report = app.add_subcommand("report", "Merge eval reports into one table");
    add_common(s_report, common);
    s_report->add_option("--inputs", rp.inputs, "report.json files, one column each")->required();
    s_report->add_option("--out", rp.out, "Output directory")->capture_default_str();

    RerunArgs rr;
    auto* s_rerun = app.add_subcommand("rerun", "Re-execute a run from its manifest and compare its metrics");
    add_common(s_rerun, common);
    s_rerun->add_option("--manifest", rr.manifest, "Manifest of the run to replay")->required();
    s_rerun->add_option("--out", rr.out, "Output of the replay (default: the original output + .rerun)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    CLI::App* active = nullptr;
    try {
        app.parse(reversed);
        active = app.get_subcommands().front();
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        if (subs.empty() && !args.empty() && !args.front().starts_with("-")) {
            err << "unknown verb '" << args.front() << "'\n";
        } else {
            err << e.what() << "\n";
        }
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    const std::string verb = active->get_name();
    try {
        if (verb == "rerun") return rerun_verb(common, rr, out, err);
        Run run = start(verb, args, common);
        if (verb == "mkdata") mkdata(run, mk, out);
        else if (verb == "mkstates") mkstates(run, ms, out);
        else if (verb == "train-encoder") train_encoder_verb(run, en, out);
        else if (verb == "embed") embed_verb(run, em, out);
        else if (verb == "sft") sft_verb(run, sf, out);
        else if (verb == "train-grpo") train_grpo_verb(run, gr, out);
        else if (verb == "score") score_verb(run, sc, out);
        else if (verb == "eval") eval_verb(run, ev, out);
        else if (verb == "report") report_verb(run, rp, out);
        return 0;
    } catch (const UsageError& e) {
        err << e.what() << "\n" << active->help();
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace sqlgrpo::cli
