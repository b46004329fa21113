#include <doctest.h>

#include "support/gradchecks.hpp"

#include "sqlgrpo/ad/gradcheck.hpp"
#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/common/text.hpp"
#include "sqlgrpo/encoder/encoder.hpp"
#include "sqlgrpo/encoder/triplet.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

using namespace sqlgrpo;
using namespace sqlgrpo::encoder;

namespace {

EncoderConfig small_config() {
    EncoderConfig c;
    c.buckets = 512;
    c.d_enc = 8;
    c.hidden = 12;
    c.d_out = 6;
    return c;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string random_text(Rng& rng) {
    static const char* pieces[] = {"a", "Z", " ", "7", "é", "ư", "ở", "Việt", "中", "文", "日本", "ß", "ü", "?", "ñ", "🙂"};
    std::string s = "x";
    for (std::size_t i = 0, n = rng.index(20); i < n; ++i) s += pieces[rng.index(16)];
    return s;
}

std::vector<Example> tiny_corpus() {
    return {
        {"1", "db", "en", "how many singers are there", "SELECT COUNT(*) FROM singer"},
        {"1", "db", "vi", "có bao nhiêu ca sĩ", "SELECT COUNT(*) FROM singer"},
        {"2", "db", "en", "count all the singers", "SELECT COUNT(*) FROM singer"},
        {"2", "db", "vi", "đếm tất cả ca sĩ", "SELECT COUNT(*) FROM singer"},
        {"3", "db", "en", "list singer names", "SELECT singer.name FROM singer"},
    };
}

// Brute-force oracle for the hard negative of an anchor.
std::string hardest_negative(const std::vector<Example>& data, const Example& anchor) {
    std::size_t best = 0;
    std::string best_q;
    bool found = false;
    for (const auto& e : data) {
        if (e.db_id != anchor.db_id || e.gold_sql == anchor.gold_sql) continue;
        std::set<std::u32string> a, b;
        auto grams = [](const std::string& s, std::set<std::u32string>& out) {
            std::u32string cps;
            for (char32_t c : decode_utf8(to_lower(s))) cps.push_back(c);
            for (std::size_t i = 0; i + 3 <= cps.size(); ++i) out.insert(cps.substr(i, 3));
        };
        grams(anchor.question, a);
        grams(e.question, b);
        std::size_t common = 0;
        for (const auto& g : a) common += b.count(g);
        if (!found || common > best) {
            best = common;
            best_q = e.question;
            found = true;
        }
    }
    return best_q;
}

} // namespace

TEST_CASE("ngram ids are deterministic, bounded and case-insensitive") {
    const EncoderConfig c;
    const auto a = ngram_ids("Show Singers", c);
    CHECK(a == ngram_ids("show singers", c));
    CHECK(a == ngram_ids("  show singers\n", c));
    for (auto id : a) CHECK((id >= 0 && static_cast<std::size_t>(id) < c.buckets));
    // 12 code points plus two markers: 13 bigrams, 12 trigrams, 11 4-grams.
    CHECK(a.size() == 36);
    CHECK_THROWS_AS(ngram_ids("   ", c), ValidationError);
    CHECK_THROWS_AS(ngram_ids("", c), ValidationError);
}

TEST_CASE("embed yields deterministic unit vectors") {
    const Encoder enc(EncoderConfig{}, 3);
    const auto v = enc.embed("wie viele Sänger gibt es?");
    CHECK(v.size() == 256);
    CHECK(v == enc.embed("wie viele Sänger gibt es?"));
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(enc.embed(" \t"), ValidationError);
}

TEST_CASE("property: unit norm on random multilingual strings") {
    const Encoder enc(EncoderConfig{}, 5);
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const std::string s = random_text(rng);
        INFO(s);
        CHECK(std::abs(norm(enc.embed(s)) - 1.0) <= 1e-9);
    }
}

TEST_CASE("encoder checkpoint round trip preserves embeddings") {
    const auto path = (std::filesystem::temp_directory_path() / "sqlgrpo_encoder_test.ckpt").string();
    const Encoder enc(small_config(), 8);
    enc.save(path);
    const Encoder back = Encoder::load(path);
    CHECK(back.embed("列出所有歌手") == enc.embed("列出所有歌手"));
    CHECK(back.config().buckets == 512);
    std::filesystem::remove(path);
}

TEST_CASE("composed encoder forward passes the finite-difference check") {
    CHECK(testing::encoder_gradcheck() < 1e-3);
}

TEST_CASE("triplet loss hand values") {
    CHECK(triplet_loss_from_distances(0.1, 0.9) == 0.0);
    CHECK(triplet_loss_from_distances(0.4, 0.4) == 0.5);
    CHECK(triplet_loss_from_distances(0.6, 0.2) == doctest::Approx(0.9).epsilon(1e-15));
    // Vectors with cosines 0.9 (positive) and 0.1 (negative).
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> p{0.9, std::sqrt(1.0 - 0.81)};
    const std::vector<double> n{0.1, std::sqrt(1.0 - 0.01)};
    CHECK(triplet_loss(a, p, n) == doctest::Approx(0.0));
    CHECK(triplet_loss(a, p, p) == doctest::Approx(0.5));
}

TEST_CASE("property: triplet loss is non-negative and zero past the margin") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double dap = 2.0 * rng.uniform();
        const double dan = 2.0 * rng.uniform();
        const double l = triplet_loss_from_distances(dap, dan);
        CHECK(l >= 0.0);
        if (dan >= dap + 0.5) CHECK(l == 0.0);
    }
}

TEST_CASE("mining: 2 questions x 2 languages give four cross-language triples") {
    const auto data = tiny_corpus();
    const auto triples = mine_triples(data, 1, {});
    REQUIRE(triples.size() == 4);
    for (const auto& t : triples) CHECK(t.negative == "list singer names");
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& t : triples) pairs.insert({t.anchor, t.positive});
    CHECK(pairs.size() == 4);

    MiningOptions pivot;
    pivot.pair_languages = PairLanguages::EnPivot;
    const auto pivoted = mine_triples(data, 1, pivot);
    CHECK(pivoted.size() == 4);
    for (const auto& t : pivoted) CHECK(t.anchor.find("ca sĩ") != std::string::npos);
}

TEST_CASE("mining errors") {
    auto data = tiny_corpus();
    data.pop_back();
    CHECK_THROWS_AS(mine_triples(data, 1, {}), ValidationError);
    std::vector<Example> monolingual = {{"1", "db", "en", "a b c", "SELECT 1"}, {"2", "db", "en", "d e f", "SELECT 2"}};
    CHECK_THROWS_AS(mine_triples(monolingual, 1, {}), ValidationError);
}

TEST_CASE("mining: hard negatives maximize trigram overlap (brute force)") {
    std::vector<Example> data;
    const char* langs[] = {"en", "de", "fr"};
    const char* stems[] = {"singers older than", "songs longer than", "singers named", "albums from"};
    for (int id = 0; id < 8; ++id) {
        for (const char* lang : langs) {
            data.push_back({std::to_string(id), id % 2 ? "a" : "b", lang,
                            std::string(lang) + " " + stems[id % 4] + " " + std::to_string(id * 7),
                            "SELECT " + std::to_string(id)});
        }
    }
    MiningOptions hard;
    hard.hard_fraction = 1.0;
    const auto triples = mine_triples(data, 9, hard);
    CHECK(triples.size() == 8 * 3);
    for (const auto& t : triples) {
        const auto it = std::find_if(data.begin(), data.end(), [&](const Example& e) { return e.question == t.anchor; });
        REQUIRE(it != data.end());
        CHECK(t.negative == hardest_negative(data, *it));
    }
}

TEST_CASE("property: mined negatives never share the anchor's SQL and mining is seeded") {
    std::vector<Example> data;
    Rng rng(21);
    for (int id = 0; id < 30; ++id) {
        const std::string sql = "SELECT " + std::to_string(rng.index(6));
        for (const char* lang : {"en", "ja", "zh"}) {
            data.push_back({std::to_string(id), "db", lang, std::string(lang) + " q" + std::to_string(id), sql});
        }
    }
    std::map<std::string, std::string> sql_of;
    for (const auto& e : data) sql_of[e.question] = e.gold_sql;
    const auto triples = mine_triples(data, 4, {});
    for (const auto& t : triples) {
        CHECK(sql_of[t.anchor] == sql_of[t.positive]);
        CHECK(sql_of[t.anchor] != sql_of[t.negative]);
    }
    const auto again = mine_triples(data, 4, {});
    REQUIRE(again.size() == triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) CHECK(again[i].negative == triples[i].negative);

    MiningOptions with_sql;
    with_sql.sql_positives = true;
    const auto extended = mine_triples(data, 4, with_sql);
    CHECK(extended.size() == triples.size() + data.size());
    CHECK(extended.back().positive == data.back().gold_sql);
}

TEST_CASE("encoder training lowers the loss on a toy corpus") {
    std::vector<Example> data;
    const char* en[] = {"how many cats", "list the dogs", "oldest bird", "count the fish", "name every horse"};
    const char* de[] = {"wie viele katzen", "liste die hunde", "ältester vogel", "zähle die fische", "nenne jedes pferd"};
    for (int i = 0; i < 5; ++i) {
        data.push_back({std::to_string(i), "zoo", "en", en[i], "SELECT " + std::to_string(i)});
        data.push_back({std::to_string(i), "zoo", "de", de[i], "SELECT " + std::to_string(i)});
    }
    const auto triples = mine_triples(data, 2, {});
    EncoderConfig c = small_config();
    c.d_enc = 16;
    c.hidden = 32;
    c.d_out = 16;
    Encoder enc(c, 4);
    EncoderTrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 5;
    tc.lr = 1e-2;
    tc.warmup_steps = 0;
    const auto log = train_encoder(enc, triples, triples, tc);
    REQUIRE(log.size() == 31);
    CHECK(log.back().train_loss < log.front().train_loss);
    CHECK(log.back().heldout.pos_cosine > log.back().heldout.neg_cosine);
}
