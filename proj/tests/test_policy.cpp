#include <doctest.h>

#include "support/gradchecks.hpp"

#include "sqlgrpo/ad/gradcheck.hpp"
#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/policy/policy.hpp"
#include "sqlgrpo/policy/sft.hpp"

#include <cmath>
#include <filesystem>

using namespace sqlgrpo;
using namespace sqlgrpo::policy;

namespace {

const std::string kFixtures = SQLGRPO_FIXTURES;

PolicyConfig tiny_config() {
    PolicyConfig c;
    c.layers = 2;
    c.d_model = 8;
    c.heads = 2;
    c.d_ff = 12;
    c.max_context = 24;
    c.tokenizer.max_prompt_len = 16;
    c.tokenizer.max_gen_len = 8;
    return c;
}

PolicyConfig small_config() {
    PolicyConfig c;
    c.layers = 2;
    c.d_model = 32;
    c.heads = 4;
    c.d_ff = 64;
    c.max_context = 160;
    c.tokenizer.max_prompt_len = 100;
    c.tokenizer.max_gen_len = 60;
    return c;
}

std::string random_utf8(Rng& rng) {
    static const char* pieces[] = {"a", "Z", " ", "(", "é", "ư", "中", "日本", "ß", "🙂", "𝔸", "\n", "'", "ñ"};
    std::string s;
    for (std::size_t i = 0, n = rng.index(40); i < n; ++i) s += pieces[rng.index(14)];
    return s;
}

} // namespace

TEST_CASE("property: tokenizer round-trips random UTF-8") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const std::string s = random_utf8(rng);
        const auto t = tokenize(s);
        CHECK(t.size() == s.size());
        CHECK(detokenize(t) == s);
    }
    CHECK(detokenize(tokenize("𝔸🙂")) == "𝔸🙂");
    CHECK(detokenize({'a', kBos, 'b', kEos, kSep, kPad}) == "ab");
}

TEST_CASE("prompt serialization") {
    const Schema movies = load_schema(kFixtures + "/movies.schema.json");
    CHECK(serialize_schema(movies) == "actor(id,name) ; casting(actorid,movieid)");
    const TokenizerConfig tc;
    const auto p = serialize_prompt("Diễn viên nào?", movies, "vi", tc);
    CHECK(p == serialize_prompt("Diễn viên nào?", movies, "vi", tc));
    std::vector<Token> expected = tokenize("vi");
    expected.push_back(kSep);
    for (Token t : tokenize("Diễn viên nào?")) expected.push_back(t);
    expected.push_back(kSep);
    for (Token t : tokenize("actor(id,name) ; casting(actorid,movieid)")) expected.push_back(t);
    expected.push_back(kSep);
    expected.push_back(kBos);
    CHECK(p == expected);
    TokenizerConfig tight;
    tight.max_prompt_len = 20;
    CHECK_THROWS_AS(serialize_prompt("q", movies, "en", tight), LengthError);
}

TEST_CASE("config validation") {
    PolicyConfig c = tiny_config();
    c.heads = 3;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = tiny_config();
    c.tokenizer.max_gen_len = 9;
    CHECK_THROWS_AS(Policy(c, 1), ValidationError);
}

TEST_CASE("log-probabilities are normalized and consistent") {
    const Policy p(tiny_config(), 3);
    const std::vector<Token> prompt = {'a', kSep, 'b', kBos};
    const std::vector<Token> completion = {'S', 'E', kEos};
    const SequenceScores s = p.log_probs(prompt, completion);
    REQUIRE(s.distributions.size() == 3);
    double total = 0.0;
    for (std::size_t t = 0; t < 3; ++t) {
        double z = 0.0;
        for (double x : s.distributions[t]) z += x;
        CHECK(std::abs(z - 1.0) <= 1e-9);
        CHECK(s.token_log_probs[t] == doctest::Approx(std::log(s.distributions[t][completion[t]])).epsilon(1e-12));
        total += s.token_log_probs[t];
    }
    CHECK(s.total == doctest::Approx(total).epsilon(1e-12));
    const SequenceScores one = p.log_probs(prompt, {'x'});
    CHECK(one.total == one.token_log_probs[0]);
    CHECK(one.total == doctest::Approx(std::log(p.next_token_distribution(prompt)['x'])).epsilon(1e-9));
    CHECK_THROWS_AS(p.log_probs(prompt, {}), LengthError);
}

TEST_CASE("cached decoding matches the full forward pass") {
    const Policy p(small_config(), 9);
    std::vector<Token> seq = tokenize("en");
    seq.push_back(kSep);
    for (Token t : tokenize("how many actors? 日本")) seq.push_back(t);
    seq.push_back(kBos);
    ad::NoGradGuard no_grad;
    const ad::Tensor lp = ad::log_softmax(p.logits(seq));
    for (std::size_t n : {std::size_t{1}, std::size_t{5}, seq.size()}) {
        const std::vector<Token> ctx(seq.begin(), seq.begin() + static_cast<long>(n));
        const auto dist = p.next_token_distribution(ctx);
        for (std::size_t v = 0; v < kVocabSize; ++v) {
            CHECK(std::abs(std::log(dist[v]) - lp.value()[(n - 1) * kVocabSize + v]) <= 1e-9);
        }
    }
}

TEST_CASE("composed policy forward passes the finite-difference check") {
    CHECK(testing::policy_gradcheck() < 1e-3);
}

TEST_CASE("sampling: seeded, bounded, and greedy in the low-temperature limit") {
    const Policy p(tiny_config(), 4);
    const std::vector<Token> prompt = {'a', kSep, 'b', kBos};
    const auto g1 = p.sample_group(prompt, 6, 1.0, 77);
    const auto g2 = p.sample_group(prompt, 6, 1.0, 77);
    REQUIRE(g1.size() == 6);
    bool any_differs = false;
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(g1[i].tokens == g2[i].tokens);
        CHECK(g1[i].log_probs == g2[i].log_probs);
        CHECK(g1[i].tokens.size() <= 8);
        CHECK(g1[i].tokens.size() == g1[i].log_probs.size());
        CHECK(g1[i].terminated == (g1[i].tokens.back() == kEos));
        any_differs = any_differs || g1[i].tokens != g1[0].tokens;
        // Stored log-probs agree with rescoring the completion.
        const auto s = p.log_probs(prompt, g1[i].tokens);
        for (std::size_t t = 0; t < s.token_log_probs.size(); ++t) {
            CHECK(std::abs(s.token_log_probs[t] - g1[i].log_probs[t]) <= 1e-9);
        }
    }
    CHECK(any_differs);
    const Completion greedy = p.greedy(prompt);
    for (const auto& c : p.sample_group(prompt, 4, 1e-6, 5)) CHECK(c.tokens == greedy.tokens);
    CHECK_THROWS_AS(p.sample_group(prompt, 2, 0.0, 1), ValidationError);
}

TEST_CASE("property: sampled frequencies match the softmax within 3 sigma") {
    const Policy p(tiny_config(), 6);
    const std::vector<Token> context = {'x', 'y', 'z'};
    const auto probs = p.next_token_distribution(context);
    PolicyConfig one_token = tiny_config();
    one_token.tokenizer.max_gen_len = 1;
    // Same weights, single-token generation budget.
    ad::Checkpoint ck = p.to_checkpoint();
    ck.meta["config"] = to_json(one_token);
    const Policy q = Policy::from_checkpoint(ck);
    const std::size_t n = 100000;
    const auto draws = q.sample_group(context, n, 1.0, 2024);
    std::vector<double> counts(kVocabSize, 0.0);
    for (const auto& c : draws) counts[static_cast<std::size_t>(c.tokens[0])] += 1.0;
    std::size_t outside = 0;
    for (std::size_t v = 0; v < kVocabSize; ++v) {
        const double mean = static_cast<double>(n) * probs[v];
        const double sigma = std::sqrt(static_cast<double>(n) * probs[v] * (1.0 - probs[v]));
        if (std::abs(counts[v] - mean) > 3.0 * sigma) ++outside;
    }
    // 260 categories at a two-sided 3-sigma level expect about 0.7 misses by
    // chance; P(Binomial(260, 0.0027) >= 5) is below 0.1%.
    CHECK(outside <= 4);
}

TEST_CASE("checkpoint round trip, clone independence and shape checks") {
    const auto path = (std::filesystem::temp_directory_path() / "sqlgrpo_policy_test.ckpt").string();
    Policy p(tiny_config(), 8);
    p.metadata()["note"] = "x";
    p.save(path);
    const Policy back = Policy::load(path);
    const std::vector<Token> prompt = {'a', kBos};
    CHECK(back.log_probs(prompt, {'b', kEos}).total == p.log_probs(prompt, {'b', kEos}).total);
    CHECK(back.metadata()["note"] == "x");
    std::filesystem::remove(path);

    Policy c = p.clone();
    c.parameters()[0].value()[0] += 1.0;
    CHECK(c.parameters()[0].value()[0] != p.parameters()[0].value()[0]);

    ad::Checkpoint ck = p.to_checkpoint();
    ck.meta["config"]["d_ff"] = 13;
    CHECK_THROWS_AS(Policy::from_checkpoint(ck), FormatError);
    ck = p.to_checkpoint();
    ck.meta["kind"] = "encoder";
    CHECK_THROWS_AS(Policy::from_checkpoint(ck), FormatError);
}

TEST_CASE("SFT lowers eval loss and memorizes a 10-example corpus") {
    const Schema movies = load_schema(kFixtures + "/movies.schema.json");
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"all actors", "SELECT actor.name FROM actor"},
        {"count actors", "SELECT COUNT(*) FROM actor"},
        {"actor ids", "SELECT actor.id FROM actor"},
        {"movie ids", "SELECT casting.movieid FROM casting"},
        {"count casting", "SELECT COUNT(*) FROM casting"},
        {"first actor", "SELECT actor.name FROM actor WHERE actor.id = 1"},
        {"second actor", "SELECT actor.name FROM actor WHERE actor.id = 2"},
        {"max movie", "SELECT MAX(casting.movieid) FROM casting"},
        {"min movie", "SELECT MIN(casting.movieid) FROM casting"},
        {"sorted names", "SELECT actor.name FROM actor ORDER BY actor.name"},
    };
    const PolicyConfig pc = small_config();
    std::vector<SftExample> data;
    for (const auto& [q, sql] : pairs) {
        data.push_back({serialize_prompt(q, movies, "en", pc.tokenizer), sft_target(sql, pc.tokenizer)});
    }
    Policy p(pc, 21);
    SftConfig sc;
    sc.epochs = 150;
    sc.batch_size = 5;
    sc.lr = 3e-3;
    sc.warmup_steps = 10;
    const auto log = sft_train(p, data, data, sc);
    REQUIRE(log.size() == 151);
    CHECK(log.back().eval_loss < log.front().eval_loss);
    CHECK(log.back().eval_loss < 0.01);
    std::size_t exact = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Completion c = p.greedy(data[i].prompt);
        INFO(c.text());
        exact += c.terminated && c.text() == pairs[i].second;
    }
    CHECK(exact == pairs.size());
    CHECK(p.metadata()["sft"]["steps"] == 300);
    CHECK_THROWS_AS(sft_target(std::string(60, 'x'), pc.tokenizer), LengthError);
}
