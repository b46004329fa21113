#include <doctest.h>

#include "sqlgrpo/cli/commands.hpp"
#include "sqlgrpo/cli/config.hpp"
#include "sqlgrpo/cli/manifest.hpp"
#include "sqlgrpo/common/text.hpp"

#include <filesystem>
#include <sstream>

using namespace sqlgrpo;
using namespace sqlgrpo::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("sqlgrpo_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

/// Small enough that the whole pipeline runs in seconds.
constexpr const char* kTiny = R"([data]
questions = 12
[encoder]
negatives_per_pair = 1
epochs = 1
d_enc = 8
hidden = 8
d_out = 8
[policy]
d_model = 16
d_ff = 32
[sft]
max_steps = 2
[grpo]
steps = 2
group_size = 2
batch_prompts = 1
snapshot_every = 1
)";

} // namespace

TEST_CASE("shipped config lists every key at its default") {
    const std::string text = read_file(std::string(SQLGRPO_CONFIGS) + "/default.toml");
    CHECK(to_json(parse_config(text)) == to_json(default_run_config()));
    std::size_t keys = 0;
    for (const auto& section : to_json(default_run_config())) keys += section.size();
    std::size_t assignments = 0;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const std::string t = trim(line);
        if (!t.empty() && t[0] != '#' && t[0] != '[') ++assignments;
    }
    CHECK(assignments == keys);
}

TEST_CASE("config rejects unknown and malformed keys with their line") {
    CHECK(config_error("[grpo]\nsteps = 10\nstpes = 3\n").find("line 3: unknown key grpo.stpes") != std::string::npos);
    CHECK(config_error("[gpro]\n").find("line 1: unknown section [gpro]") != std::string::npos);
    CHECK(config_error("[grpo]\nsteps = \"ten\"\n").find("line 2: grpo.steps: expected an integer") !=
          std::string::npos);
    CHECK(config_error("[eval]\nstates = -1\n").find("non-negative") != std::string::npos);
    CHECK(config_error("[grpo]\nbeta = 0.1\nbeta = 0.2\n").find("line 3: duplicate key") != std::string::npos);
    CHECK(config_error("steps = 1\n").find("outside any section") != std::string::npos);
    CHECK(config_error("[grpo]\nsem_mode = \"both\"\n").find("sem_mode") != std::string::npos);
    CHECK(config_error("[encoder]\nngram_sizes = [2, \"x\"]\n").find("line 2") != std::string::npos);

    const RunConfig c = parse_config("# comment\n[grpo]\nlr = 1e-5  # trailing\nsem_mode = \"question\"\n"
                                     "[encoder]\nngram_sizes = [3]\nsql_positives = false\n");
    CHECK(c.grpo.lr == 1e-5);
    CHECK(c.grpo.sem_mode == reward::SemMode::Question);
    CHECK(c.encoder.model.ngram_sizes == std::vector<int>{3});
    CHECK_FALSE(c.encoder.mining.sql_positives);
    CHECK(c.grpo.steps == default_run_config().grpo.steps);
}

TEST_CASE("config JSON round trip is strict") {
    RunConfig c = default_run_config();
    apply_override(c, "grpo.steps=7");
    apply_override(c, "rewards.w_sem = 0");
    CHECK(c.grpo.steps == 7);
    CHECK(c.grpo.weights.sem == 0.0);
    CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
    json j = to_json(c);
    j["grpo"]["typo"] = 1;
    CHECK_THROWS_AS(config_from_json(j), ValidationError);
    CHECK_THROWS_AS(apply_override(c, "steps=7"), ValidationError);
    CHECK_THROWS_AS(apply_override(c, "grpo.nope=7"), ValidationError);
}

TEST_CASE("content hashes match git object ids") {
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    const fs::path empty = scratch("empty_tree");
    CHECK(git_hash_path(empty.string()) == "4b825dc642cb6eb9a060e54bf8d69288fbee4904");
    // Ids from `git write-tree` on the same layout; "b/" sorts after "b.txt".
    const fs::path t = scratch("tree");
    write_file((t / "a").string(), "x\n");
    fs::create_directories(t / "b");
    write_file((t / "b" / "c").string(), "y\n");
    write_file((t / "b.txt").string(), "z");
    CHECK(git_hash_path(t.string()) == "fa6ae8c9b96c43f2c5a8a9278af9e8515c7546f0");
    write_file((t / "manifest.json").string(), "{}");
    CHECK(git_hash_path(t.string(), {"manifest.json"}) == "fa6ae8c9b96c43f2c5a8a9278af9e8515c7546f0");
    CHECK_THROWS_AS(git_hash_path((t / "missing").string()), ValidationError);
}

TEST_CASE("score with candidate equal to gold earns full execution reward") {
    const std::string fx = SQLGRPO_FIXTURES;
    const std::string gold = "SELECT name FROM actor WHERE id > 1";
    const Result r = run({"score", "--schema", fx + "/movies.schema.json", "--db", fx + "/movies.state.json", "--gold",
                          gold, "--candidate", gold});
    REQUIRE(r.code == 0);
    const json bundle = json::parse(r.out);
    CHECK(bundle.at("r_exec").get<double>() == 1.0);
    CHECK(bundle.at("r_syntax").get<double>() == 1.0);
    CHECK(bundle.at("r_schema").get<double>() == 1.0);

    const Result bad = run({"score", "--schema", fx + "/movies.schema.json", "--db", fx + "/movies.state.json",
                            "--gold", gold, "--candidate", "SELECT nam FROM actor"});
    REQUIRE(bad.code == 0);
    CHECK(json::parse(bad.out).at("r_exec").get<double>() == 0.0);

    const Result bad_gold = run({"score", "--schema", fx + "/movies.schema.json", "--db", fx + "/movies.state.json",
                                 "--gold", "SELECT FROM", "--candidate", gold});
    CHECK(bad_gold.code == 1);
}

TEST_CASE("usage errors exit 1 with usage text") {
    const Result unknown = run({"frobnicate"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("unknown verb 'frobnicate'") != std::string::npos);
    CHECK(unknown.err.find("train-grpo") != std::string::npos);

    const Result none = run({});
    CHECK(none.code == 1);

    const Result missing = run({"score", "--schema", "x.json"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("--candidate") != std::string::npos);

    const Result mode = run({"train-grpo", "--init", "x", "--sem-mode", "both"});
    CHECK(mode.code == 1);

    const Result help = run({"eval", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("--policy") != std::string::npos);
}

TEST_CASE("pipeline verbs write replayable manifests") {
    const fs::path w = scratch("pipeline");
    write_file((w / "tiny.toml").string(), kTiny);
    auto verb = [&](std::vector<std::string> args) {
        args.insert(args.begin() + 1, {"--workdir", w.string(), "--config", "tiny.toml"});
        return run(args);
    };

    REQUIRE(verb({"mkdata"}).code == 0);
    const Manifest data = load_manifest((w / "data" / kManifestName).string());
    CHECK(data.metrics.at("train_examples").get<std::size_t>() + data.metrics.at("dev_examples").get<std::size_t>() ==
          3 * 12 * 7);
    CHECK(data.config.at("grpo").at("group_size") == 2);
    CHECK(data.config.at("eval").at("states") == 5);  // defaults are materialized

    REQUIRE(verb({"train-encoder"}).code == 0);
    REQUIRE(verb({"sft"}).code == 0);

    SUBCASE("no-contrastive manifest drops the semantic reward and the encoder") {
        const Result r = verb({"train-grpo", "--init", "sft", "--no-contrastive", "--out", "nc"});
        REQUIRE(r.code == 0);
        const Manifest m = load_manifest((w / "nc" / kManifestName).string());
        CHECK(m.config.at("rewards").at("w_sem").get<double>() == 0.0);
        CHECK(m.paths.count("encoder") == 0);
        CHECK(m.inputs.count("encoder") == 0);
        CHECK(m.inputs.count("init") == 1);
        CHECK(m.metrics.at("steps") == 2);
        CHECK(m.metrics.at("snapshots").size() == 3);

        CHECK(verb({"train-grpo", "--init", "sft", "--no-contrastive", "--encoder", "encoder"}).code == 1);
        CHECK(verb({"train-grpo", "--init", "sft"}).code == 1);  // w_sem > 0 without an encoder
    }

    SUBCASE("question mode is flagged through to the report") {
        REQUIRE(verb({"train-grpo", "--init", "sft", "--encoder", "encoder", "--sem-mode", "question", "--out", "q"})
                    .code == 0);
        const Manifest m = load_manifest((w / "q" / kManifestName).string());
        REQUIRE(m.notes.size() == 1);
        CHECK(m.config.at("grpo").at("sem_mode") == "question");
        CHECK(m.paths.at("encoder") == "encoder");
        const Result e = verb({"eval", "--policy", "q", "--out", "eval_q"});
        REQUIRE(e.code == 0);
        CHECK(e.out.find("sem_mode=question") != std::string::npos);
        const json report = json::parse(read_file((w / "eval_q" / "report.json").string()));
        CHECK(report.at("notes").size() == 1);

        REQUIRE(verb({"train-grpo", "--init", "sft", "--encoder", "encoder", "--sem-mode", "sql", "--out", "s"}).code ==
                0);
        CHECK(load_manifest((w / "s" / kManifestName).string()).notes.empty());
    }

    SUBCASE("every run replays to identical metrics") {
        REQUIRE(verb({"train-grpo", "--init", "sft", "--encoder", "encoder", "--out", "g"}).code == 0);
        REQUIRE(verb({"eval", "--policy", "g", "--out", "eval_g"}).code == 0);
        REQUIRE(verb({"report", "--inputs", "eval_g/report.json", "--out", "rep"}).code == 0);
        REQUIRE(verb({"embed", "--encoder", "encoder", "--text", "xin chào", "--out", "emb.json"}).code == 0);
        REQUIRE(verb({"mkstates", "--schema", "data/concert.schema.json", "--count", "2"}).code == 0);
        for (const std::string m : {"data/manifest.json", "encoder/manifest.json", "sft/manifest.json",
                                    "g/manifest.json", "eval_g/manifest.json", "rep/manifest.json",
                                    "emb.json.manifest.json", "states/manifest.json"}) {
            CAPTURE(m);
            const Result r = run({"rerun", "--workdir", w.string(), "--manifest", m});
            CHECK(r.code == 0);
            CHECK(r.out.find("\"metrics_identical\":true") != std::string::npos);
        }

        // A changed input is refused rather than silently replayed.
        write_file((w / "data" / "extra.txt").string(), "x");
        CHECK(run({"rerun", "--workdir", w.string(), "--manifest", "sft/manifest.json"}).code == 1);
    }

    SUBCASE("runtime failures exit 2") {
        write_file((w / "blocker").string(), "");
        CHECK(verb({"sft", "--out", "blocker/sub"}).code == 2);
    }
}
