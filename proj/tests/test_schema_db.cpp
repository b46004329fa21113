#include <doctest.h>

#include "sqlgrpo/common/error.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/db/schema.hpp"
#include "sqlgrpo/db/state.hpp"

#include <set>

using namespace sqlgrpo;

namespace {

const std::string kFixtures = SQLGRPO_FIXTURES;

Schema movies() { return load_schema(kFixtures + "/movies.schema.json"); }

Schema random_schema(Rng& rng) {
    Schema s;
    s.db_id = "db" + std::to_string(rng.index(1000));
    const auto n_tables = 1 + rng.index(4);
    for (std::size_t t = 0; t < n_tables; ++t) {
        Table table;
        table.name = "t" + std::to_string(t);
        const auto n_cols = 1 + rng.index(4);
        for (std::size_t c = 0; c < n_cols; ++c) {
            const auto type = static_cast<ColumnType>(rng.index(3));
            table.columns.push_back({"c" + std::to_string(c), type});
        }
        // Key on the first column half of the time, composite occasionally.
        if (rng.bernoulli(0.5)) {
            table.primary_key.push_back("c0");
            if (n_cols > 1 && rng.bernoulli(0.3)) {
                table.primary_key.push_back("c1");
            }
        }
        s.tables.push_back(std::move(table));
    }
    for (std::size_t t = 1; t < n_tables; ++t) {
        const Table& parent = s.tables[rng.index(t)];
        if (parent.primary_key.size() != 1 || !rng.bernoulli(0.7)) {
            continue;
        }
        const Table& child = s.tables[t];
        for (std::size_t c = 0; c < child.columns.size(); ++c) {
            if (!child.in_primary_key(child.columns[c].name) && child.columns[c].type == parent.columns[0].type) {
                s.foreign_keys.push_back({child.name, child.columns[c].name, parent.name, "c0"});
                break;
            }
        }
    }
    s.validate();
    return s;
}

} // namespace

TEST_CASE("load_schema reads the movies fixture") {
    const Schema s = movies();
    CHECK(s.db_id == "movies");
    REQUIRE(s.tables.size() == 2);
    CHECK(s.tables[0].name == "actor");
    CHECK(s.tables[1].name == "casting");
    REQUIRE(s.foreign_keys.size() == 1);
    CHECK(s.foreign_keys[0].child_column == "actorid");
    CHECK(s.find_table("ACTOR") == &s.tables[0]);
}

TEST_CASE("schema with zero tables is valid") {
    const Schema s = schema_from_json(nlohmann::json::parse(R"({"db_id":"empty","tables":[],"foreign_keys":[]})"));
    CHECK(s.tables.empty());
}

TEST_CASE("schema integrity errors") {
    SUBCASE("foreign key to a missing table") {
        const auto j = nlohmann::json::parse(R"({"db_id":"x","tables":[
            {"name":"a","columns":[{"name":"id","type":"int"}],"primary_key":["id"]}],
            "foreign_keys":[{"from":"a.id","to":"b.id"}]})");
        CHECK_THROWS_AS(schema_from_json(j), IntegrityError);
    }
    SUBCASE("duplicate table names differ only in case") {
        const auto j = nlohmann::json::parse(R"({"db_id":"x","tables":[
            {"name":"a","columns":[{"name":"id","type":"int"}]},
            {"name":"A","columns":[{"name":"id","type":"int"}]}]})");
        CHECK_THROWS_AS(schema_from_json(j), IntegrityError);
    }
    SUBCASE("duplicate column") {
        const auto j = nlohmann::json::parse(R"({"db_id":"x","tables":[
            {"name":"a","columns":[{"name":"id","type":"int"},{"name":"ID","type":"text"}]}]})");
        CHECK_THROWS_AS(schema_from_json(j), IntegrityError);
    }
    SUBCASE("foreign key type mismatch") {
        const auto j = nlohmann::json::parse(R"({"db_id":"x","tables":[
            {"name":"a","columns":[{"name":"id","type":"int"}],"primary_key":["id"]},
            {"name":"b","columns":[{"name":"aid","type":"text"}]}],
            "foreign_keys":[{"from":"b.aid","to":"a.id"}]})");
        CHECK_THROWS_AS(schema_from_json(j), IntegrityError);
    }
    SUBCASE("malformed json") {
        CHECK_THROWS_AS(schema_from_json(nlohmann::json::parse(R"({"tables":[]})")), FormatError);
    }
}

TEST_CASE("validate_state on the movies fixture") {
    const Schema s = movies();
    DatabaseState state = load_state(kFixtures + "/movies.state.json", s);
    CHECK(state.table_rows("actor").size() == 2);
    CHECK(state.table_rows("casting").size() == 8);
    CHECK(validate_state(s, state).empty());

    SUBCASE("duplicate primary key") {
        state.rows["actor"].push_back({Value::integer(1), Value::text("C")});
        const auto v = validate_state(s, state);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::PrimaryKeyDuplicate);
    }
    SUBCASE("dangling foreign key") {
        state.rows["casting"].push_back({Value::integer(99), Value::integer(1)});
        const auto v = validate_state(s, state);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::ForeignKeyDangling);
    }
    SUBCASE("null foreign key is allowed") {
        state.rows["casting"].push_back({Value::null(), Value::integer(1)});
        CHECK(validate_state(s, state).empty());
    }
    SUBCASE("type mismatch and arity") {
        state.rows["actor"].push_back({Value::text("3"), Value::text("C")});
        state.rows["actor"].push_back({Value::integer(4)});
        const auto v = validate_state(s, state);
        REQUIRE(v.size() == 2);
        CHECK(v[0].kind == Violation::Kind::Type);
        CHECK(v[1].kind == Violation::Kind::Arity);
    }
    SUBCASE("null primary key") {
        state.rows["actor"].push_back({Value::null(), Value::text("C")});
        const auto v = validate_state(s, state);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == Violation::Kind::PrimaryKeyNull);
    }
}

TEST_CASE("generate_random_state is deterministic and collides") {
    const Schema s = movies();
    const DatabaseState a = generate_random_state(s, 7, 8);
    const DatabaseState b = generate_random_state(s, 7, 8);
    CHECK(state_to_json(a).dump() == state_to_json(b).dump());
    CHECK(validate_state(s, a).empty());
    CHECK(a.table_rows("actor").size() == 8);

    const auto& casting = a.table_rows("casting");
    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    bool duplicated = false;
    for (const auto& row : casting) {
        if (row[0].is_null() || row[1].is_null()) {
            continue;
        }
        duplicated = duplicated || !pairs.insert({row[0].as_int(), row[1].as_int()}).second;
    }
    CHECK(duplicated);

    const DatabaseState c = generate_random_state(s, 8, 8);
    CHECK(state_to_json(a).dump() != state_to_json(c).dump());
}

TEST_CASE("generate_random_state value pools stay small") {
    const Schema s = movies();
    const DatabaseState st = generate_random_state(s, 3, 6);
    std::set<std::int64_t> movie_ids;
    std::set<std::string> names;
    for (const auto& row : st.table_rows("casting")) {
        if (!row[1].is_null()) movie_ids.insert(row[1].as_int());
    }
    for (const auto& row : st.table_rows("actor")) {
        if (!row[1].is_null()) names.insert(row[1].as_text());
    }
    CHECK(movie_ids.size() <= 12);
    CHECK(names.size() <= 6);
}

TEST_CASE("generate_random_state constraint errors") {
    Schema s = movies();
    CHECK_THROWS_AS(generate_random_state(s, 1, 0), ConstraintError);

    Schema cyc;
    cyc.db_id = "cyc";
    cyc.tables.push_back({"a", {{"id", ColumnType::Int}, {"bid", ColumnType::Int}}, {"id"}});
    cyc.tables.push_back({"b", {{"id", ColumnType::Int}, {"aid", ColumnType::Int}}, {"id"}});
    cyc.foreign_keys.push_back({"a", "bid", "b", "id"});
    cyc.foreign_keys.push_back({"b", "aid", "a", "id"});
    cyc.validate();
    CHECK_THROWS_AS(generate_random_state(cyc, 1, 4), ConstraintError);

    // Keyed on a foreign key into a column with fewer distinct values.
    Schema narrow;
    narrow.db_id = "narrow";
    narrow.tables.push_back({"p", {{"id", ColumnType::Int}, {"tag", ColumnType::Text}}, {"id"}});
    narrow.tables.push_back({"c", {{"tag", ColumnType::Text}}, {"tag"}});
    narrow.foreign_keys.push_back({"c", "tag", "p", "tag"});
    narrow.validate();
    StateGenOptions opts;
    opts.null_fraction = 0.0;
    // p.tag draws 12 rows from a pool of 12 words; duplicates leave fewer
    // than 12 distinct parents for c's key.
    CHECK_THROWS_AS(generate_random_state(narrow, 5, 12, opts), ConstraintError);
}

TEST_CASE("property: generated states validate and are reproducible") {
    Rng rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const Schema s = random_schema(rng);
        const std::uint64_t seed = rng.next();
        const std::size_t size = 1 + rng.index(10);
        const DatabaseState a = generate_random_state(s, seed, size);
        const auto violations = validate_state(s, a);
        INFO("trial " << trial << ": " << (violations.empty() ? "" : violations[0].message));
        CHECK(violations.empty());
        CHECK(state_to_json(a).dump() == state_to_json(generate_random_state(s, seed, size)).dump());
    }
}

TEST_CASE("state json round trip keeps values and nulls") {
    const Schema s = movies();
    const DatabaseState a = generate_random_state(s, 11, 5);
    const DatabaseState b = state_from_json(state_to_json(a), s);
    CHECK(state_to_json(b).dump() == state_to_json(a).dump());
    CHECK(b.rows == a.rows);
}
