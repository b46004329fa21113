#include <doctest.h>

#include "support/gradchecks.hpp"

#include "sqlgrpo/grpo/grpo.hpp"
#include "sqlgrpo/policy/sft.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sqlgrpo;
using namespace sqlgrpo::grpo;

namespace {

const std::string kFixtures = SQLGRPO_FIXTURES;

policy::PolicyConfig toy_config(std::size_t max_gen) {
    policy::PolicyConfig c;
    c.layers = 1;
    c.d_model = 16;
    c.heads = 2;
    c.d_ff = 32;
    c.max_context = 96 + max_gen;
    c.tokenizer.max_prompt_len = 96;
    c.tokenizer.max_gen_len = max_gen;
    return c;
}

std::vector<std::vector<double>> random_dists(Rng& rng, std::size_t n, std::size_t v) {
    std::vector<std::vector<double>> out(n, std::vector<double>(v));
    for (auto& d : out) {
        double z = 0.0;
        for (auto& x : d) z += (x = std::exp(3.0 * rng.normal()));
        for (auto& x : d) x /= z;
    }
    return out;
}

struct MoviesTask {
    Schema schema = load_schema(kFixtures + "/movies.schema.json");
    DatabaseState state = load_state(kFixtures + "/movies.state.json", schema);
    reward::GoldContext gold{schema, state, "SELECT actor.name FROM actor"};

    GrpoPrompt prompt(const policy::PolicyConfig& c, const std::string& q = "list actors") const {
        return {policy::serialize_prompt(q, schema, "en", c.tokenizer), q, "list actors", &gold};
    }
};

std::vector<double> snapshot(const policy::Policy& p) {
    std::vector<double> out;
    for (const auto& t : p.parameters()) out.insert(out.end(), t.value().begin(), t.value().end());
    return out;
}

} // namespace

TEST_CASE("group advantages: hand cases") {
    CHECK(group_advantages({1, 1, 1, 1}, 1e-8) == std::vector<double>{0, 0, 0, 0});
    const auto a = group_advantages({2.2, 0.0}, 1e-8);
    CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-7));
    const auto exact = group_advantages({2.2, 0.0}, 0.0);
    CHECK(exact[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(group_advantages({3.0, 3.0 + 1e-10}, 1e-8) == std::vector<double>{0, 0});
}

TEST_CASE("property: advantages are shift invariant, scale invariant, and centred") {
    Rng rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t g = 2 + rng.index(10);
        std::vector<double> r(g), shifted(g), scaled(g);
        const double c = 10.0 * rng.normal();
        const double k = 0.01 + 10.0 * rng.uniform();
        for (std::size_t i = 0; i < g; ++i) {
            r[i] = rng.bernoulli(0.3) ? 0.0 : 2.2 * rng.uniform();
            shifted[i] = r[i] + c;
            scaled[i] = k * r[i];
        }
        const auto a = group_advantages(r, 1e-8);
        const auto as = group_advantages(shifted, 1e-8);
        const auto a0 = group_advantages(r, 0.0);
        const auto ak = group_advantages(scaled, 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < g; ++i) {
            CHECK(std::abs(a[i] - as[i]) <= 1e-9);
            CHECK(std::abs(a0[i] - ak[i]) <= 1e-9);
            sum += a[i];
        }
        CHECK(std::abs(sum) <= 1e-9);
    }
}

TEST_CASE("KL divergence") {
    const auto hand = kl_divergence({{0.5, 0.5}}, {{0.9, 0.1}});
    const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(hand.mean == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(hand.mean - 0.5108) < 1e-4);
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_dists(rng, 3, 1 + rng.index(8));
        auto q = random_dists(rng, 3, p[0].size());
        const auto self = kl_divergence(p, p);
        for (double k : self.per_token) CHECK(k == 0.0);
        for (double k : kl_divergence(p, q).per_token) CHECK(k >= -1e-15);
    }
    CHECK_THROWS_AS(kl_divergence({{1.0}}, {}), ValidationError);
}

TEST_CASE("config validation") {
    GrpoConfig c;
    c.group_size = 1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = GrpoConfig{};
    c.beta = -0.1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = GrpoConfig{};
    CHECK_THROWS_AS(GrpoTrainer(policy::Policy(toy_config(8), 1), nullptr, c), ValidationError);
    c.weights.sem = 0.0;
    CHECK_NOTHROW(GrpoTrainer(policy::Policy(toy_config(8), 1), nullptr, c));
}

TEST_CASE("equal rewards with beta 0 give a zero gradient") {
    const MoviesTask task;
    const auto pc = toy_config(8);
    GrpoConfig c;
    c.group_size = 4;
    c.beta = 0.0;
    c.weights.sem = 0.0;
    GrpoTrainer trainer(policy::Policy(pc, 2), nullptr, c);
    trainer.set_reward([](const GrpoPrompt&, const policy::Completion&) { return reward::RewardBundle{0, 1, 0.5, 0, 0.75, {}}; });
    const auto before = snapshot(trainer.policy());
    StepDetail detail;
    const TrainRecord r = trainer.step({task.prompt(pc)}, &detail);
    CHECK(r.grad_norm == 0.0);
    CHECK(detail.advantages[0] == std::vector<double>(4, 0.0));
    CHECK(snapshot(trainer.policy()) == before);
}

TEST_CASE("the reference policy stays frozen while the policy moves") {
    const MoviesTask task;
    const auto pc = toy_config(12);
    GrpoConfig c;
    c.group_size = 4;
    c.batch_prompts = 2;
    c.weights.sem = 0.0;
    c.lr = 1e-2;
    c.warmup_steps = 0;
    policy::Policy p(pc, 3);
    const auto initial = snapshot(p);
    GrpoTrainer trainer(p, nullptr, c);
    // Rewards that vary within each group so the policy receives updates.
    trainer.set_reward([](const GrpoPrompt&, const policy::Completion& y) {
        const double r = static_cast<double>(y.tokens.size() % 3);
        return reward::RewardBundle{0, 0, 0, 0, r, {}};
    });
    const std::vector<GrpoPrompt> prompts = {task.prompt(pc), task.prompt(pc, "names")};
    const std::vector<double> ref_scores_before =
        trainer.reference().log_probs(prompts[0].tokens, {'S', policy::kEos}).token_log_probs;
    for (int s = 0; s < 5; ++s) trainer.step(prompts);
    CHECK(snapshot(trainer.reference()) == initial);
    CHECK(trainer.reference().log_probs(prompts[0].tokens, {'S', policy::kEos}).token_log_probs == ref_scores_before);
    CHECK(snapshot(trainer.policy()) != initial);
    // The caller's handle aliases the trained policy.
    CHECK(snapshot(p) == snapshot(trainer.policy()));
    CHECK(trainer.log().records().size() == 5);
    CHECK(trainer.log().records().back().mean_kl > 0.0);
}

TEST_CASE("bandit sanity: with beta 0 the rewarded completion's probability rises monotonically") {
    const std::vector<double> probs = testing::bandit_trajectory(50);
    for (std::size_t s = 1; s < probs.size(); ++s) {
        INFO("step " << s << ": " << probs[s - 1] << " -> " << probs[s]);
        CHECK(probs[s] > probs[s - 1]);
    }
    CHECK(probs.back() > 2.0 * probs.front());
}

TEST_CASE("a very large beta pins the policy to the reference") {
    const MoviesTask task;
    const auto pc = toy_config(16);
    GrpoConfig c;
    c.group_size = 4;
    c.batch_prompts = 1;
    c.beta = 1e3;
    c.lr = 1e-2;
    c.warmup_steps = 0;
    c.weights.sem = 0.0;
    c.steps = 100;
    GrpoTrainer trainer(policy::Policy(pc, 5), nullptr, c);
    const auto log = train(trainer, {task.prompt(pc)});
    REQUIRE(log.records().size() == 100);
    CHECK(log.records().back().mean_kl < 0.05);
}

TEST_CASE("question mode: the semantic weight cancels out of the advantages") {
    const MoviesTask task;
    const auto pc = toy_config(40);
    const encoder::Encoder enc(encoder::EncoderConfig{}, 3);
    policy::Policy base(pc, 7);
    const std::vector<GrpoPrompt> prompts = {task.prompt(pc, "liệt kê diễn viên"), task.prompt(pc, "列出演员")};
    // A short warm-start so that groups mix valid and invalid SQL.
    std::vector<policy::SftExample> warm;
    for (const auto& p : prompts) warm.push_back({p.tokens, policy::sft_target("SELECT actor.name FROM actor", pc.tokenizer)});
    policy::SftConfig sc;
    sc.epochs = 120;
    sc.batch_size = 2;
    sc.lr = 1e-2;
    sc.warmup_steps = 0;
    policy::sft_train(base, warm, {}, sc);
    GrpoConfig with;
    with.group_size = 6;
    with.batch_prompts = 2;
    with.sem_mode = reward::SemMode::Question;
    GrpoConfig without = with;
    without.weights.sem = 0.0;
    GrpoTrainer a(base.clone(), &enc, with);
    GrpoTrainer b(base.clone(), nullptr, without);
    StepDetail da, db;
    a.step(prompts, &da);
    b.step(prompts, &db);
    bool any_nonzero = false;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t k = 0; k < 6; ++k) {
            CHECK(da.completions[i][k].tokens == db.completions[i][k].tokens);
            CHECK(std::abs(da.advantages[i][k] - db.advantages[i][k]) <= 1e-9);
            any_nonzero = any_nonzero || da.advantages[i][k] != 0.0;
            CHECK(da.rewards[i][k].r_sem == da.rewards[i][0].r_sem);
        }
    }
    CHECK(da.rewards[0][0].r_sem != 0.0);
    CHECK(any_nonzero);
}

TEST_CASE("train log is one JSON object per step") {
    const MoviesTask task;
    const auto pc = toy_config(8);
    GrpoConfig c;
    c.group_size = 2;
    c.batch_prompts = 3;
    c.steps = 4;
    c.weights.sem = 0.0;
    GrpoTrainer trainer(policy::Policy(pc, 1), nullptr, c);
    std::size_t calls = 0;
    const auto log = train(trainer, {task.prompt(pc), task.prompt(pc, "x")}, [&](const GrpoTrainer&) { ++calls; });
    CHECK(calls == 4);
    const auto path = (std::filesystem::temp_directory_path() / "sqlgrpo_trainlog.jsonl").string();
    log.write_jsonl(path);
    std::ifstream in(path);
    std::string line;
    std::int64_t expected_step = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["step"] == expected_step++);
        CHECK(j.contains("mean_kl"));
        CHECK(j.contains("rolling_exec_acc"));
    }
    CHECK(expected_step == 4);
    std::filesystem::remove(path);
}
