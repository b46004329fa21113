#include <doctest.h>

#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/reward/reward.hpp"
#include "sqlgrpo/sql/parser.hpp"

#include <cmath>

using namespace sqlgrpo;
using namespace sqlgrpo::reward;

namespace {

const std::string kFixtures = SQLGRPO_FIXTURES;
const std::string kGold =
    "SELECT actor.name FROM actor JOIN casting ON actor.id = casting.actorid GROUP BY actor.id, actor.name "
    "HAVING COUNT(DISTINCT casting.movieid) > 3";
const std::string kVariant =
    "SELECT actor.name FROM actor JOIN casting ON actor.id = casting.actorid GROUP BY actor.id "
    "HAVING COUNT(*) >= 3";

struct Fixture {
    Schema schema = load_schema(kFixtures + "/movies.schema.json");
    DatabaseState state = load_state(kFixtures + "/movies.state.json", schema);
};

} // namespace

TEST_CASE("exec reward") {
    const Fixture f;
    const GoldContext gold(f.schema, f.state, kGold);
    CHECK(exec_reward(parse_candidate(kGold), gold) == 1.0);
    CHECK(exec_reward(parse_candidate(kVariant), gold) == 0.0);
    std::string error;
    CHECK(exec_reward(parse_candidate("SELECT FROM"), gold, &error) == 0.0);
    CHECK(error.rfind("parse error", 0) == 0);
    // Result equality, not text equality.
    CHECK(exec_reward(parse_candidate("select a.name from actor a where a.id = 2"), gold) == 1.0);
}

TEST_CASE("syntax reward") {
    const Fixture f;
    CHECK(syntax_reward(parse_candidate(kVariant), f.schema, f.state) == 1.0);
    CHECK(syntax_reward(parse_candidate("SELECT FROM"), f.schema, f.state) == 0.0);
    std::string error;
    CHECK(syntax_reward(parse_candidate("SELECT actor.wage FROM actor"), f.schema, f.state, &error) == 0.0);
    CHECK(error.rfind("execution error", 0) == 0);
}

TEST_CASE("schema reward") {
    const Fixture f;
    const GoldContext gold(f.schema, f.state, kGold);
    CHECK(schema_reward(parse_candidate(kGold), gold.gold_refs(), f.schema) == 1.0);
    CHECK(schema_reward(parse_candidate("SELECT actor.name FROM actor"), gold.gold_refs(), f.schema) == 0.5);
    // refs {actor, actor.name, actor.id} valid, actor.wage invalid: F1 = 2*3/(3+6), validity 3/4
    const double r = schema_reward(parse_candidate("SELECT actor.name, actor.wage FROM actor WHERE actor.id = 1"),
                                   gold.gold_refs(), f.schema);
    CHECK(r == doctest::Approx(2.0 * 3.0 / 9.0 * 0.75));
    CHECK(schema_reward(parse_candidate("SELECT 1"), gold.gold_refs(), f.schema) == 0.0);
    CHECK(schema_reward(parse_candidate("garbage"), gold.gold_refs(), f.schema) == 0.0);
}

TEST_CASE("property: schema reward ignores aliases and keyword case") {
    const Fixture f;
    const GoldContext gold(f.schema, f.state, kGold);
    const double plain = schema_reward(parse_candidate(kVariant), gold.gold_refs(), f.schema);
    const double aliased = schema_reward(
        parse_candidate("select A.name from actor as A join casting c on A.id = c.actorid group by A.id having count(*) >= 3"),
        gold.gold_refs(), f.schema);
    CHECK(plain == aliased);
}

TEST_CASE("combine") {
    const RewardWeights w;
    CHECK(combine({1, 1, 1, 1, 0, {}}, w) == doctest::Approx(2.2).epsilon(1e-15));
    CHECK(combine({0, 0, 0, 0, 0, {}}, w) == 0.0);
    CHECK(combine({0, 1, 0.5, 0.8, 0, {}}, w) == doctest::Approx(0.91).epsilon(1e-15));
    RewardWeights bad;
    bad.sem = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("semantic reward") {
    const Fixture f;
    const encoder::Encoder enc(encoder::EncoderConfig{}, 1);
    const Candidate gold = parse_candidate(kGold);
    CHECK(semantic_reward(enc, "same text", "same text", SemMode::Question, gold, f.schema) ==
          doctest::Approx(1.0).epsilon(1e-12));
    const std::string canonical = semantic_text(gold, f.schema);
    CHECK(canonical == sql::render(sql::parse(kGold)));
    CHECK(semantic_reward(enc, canonical, "", SemMode::Sql, gold, f.schema) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(encoder::cosine({1.0, 0.0}, {0.0, 2.0}) == 0.0);
    CHECK(semantic_reward(enc, "q", "r", SemMode::Sql, parse_candidate("   "), f.schema) == 0.0);
}

TEST_CASE("property: bundle ranges and r_exec <= r_syntax on garbage and near-miss candidates") {
    const Fixture f;
    const GoldContext gold(f.schema, f.state, kGold);
    const RewardWeights w;
    Rng rng(12);
    const std::vector<std::string> pieces = {"SELECT", "actor.name", "FROM", "actor", "JOIN", "casting", "ON",
                                             "actor.id", "=", "casting.actorid", "WHERE", "COUNT(*)", ">", "3",
                                             "GROUP BY", ",", "wage", "(", ")", "'x'", "HAVING", "*"};
    for (int i = 0; i < 500; ++i) {
        std::string text;
        for (std::size_t k = 0, n = 1 + rng.index(12); k < n; ++k) text += pieces[rng.index(pieces.size())] + " ";
        if (rng.bernoulli(0.3)) text = "SELECT actor.name FROM actor WHERE actor.id > " + std::to_string(rng.index(4));
        INFO(text);
        const RewardBundle b = score(parse_candidate(text), gold, 0.3, w);
        CHECK(b.r_exec <= b.r_syntax);
        CHECK((b.r_schema >= 0.0 && b.r_schema <= 1.0));
        CHECK((b.r_exec == 0.0 || b.r_exec == 1.0));
        CHECK((b.r_syntax == 0.0 || b.r_syntax == 1.0));
        CHECK(b.r_total == doctest::Approx(combine(b, w)));
        CHECK(b.error.has_value() == (b.r_syntax == 0.0));
    }
}

TEST_CASE("bundle json and the no-contrastive weights") {
    const Fixture f;
    const GoldContext gold(f.schema, f.state, kGold);
    RewardWeights nc;
    nc.sem = 0.0;
    const RewardBundle b = score(parse_candidate(kGold), gold, 0.9, nc);
    CHECK(b.r_sem == 0.0);
    CHECK(b.r_total == doctest::Approx(2.0));
    const auto j = to_json(b);
    CHECK(j["r_exec"] == 1.0);
    CHECK(j["error"].is_null());
    CHECK_THROWS_AS(GoldContext(f.schema, f.state, "SELECT wage FROM actor"), ValidationError);
}
