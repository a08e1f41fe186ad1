/// @file test_ingest.cpp
/// @brief Article fetching, cache behaviour, bundle serialization, and the
///        offline fixture source.
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sapphire/ingest.hpp"
#include "sapphire/textio.hpp"
#include "sapphire/utf8.hpp"
#include "support/doubles.hpp"
#include "support/temp_dir.hpp"

using namespace sapphire;
using sapphire::testing::StaticKnowledgeSource;
using sapphire::testing::TempDir;
using sapphire::testing::UnreachableKnowledgeSource;
using sapphire::testing::fixture_articles;

TEST_SUITE("ingest") {

// -----------------------------------------------------------------------
// Name normalization (cache keys)
// -----------------------------------------------------------------------

TEST_CASE("system names normalize to lowercase with collapsed whitespace") {
    CHECK(ingest::normalize_system_name("Solenoid Valve") == "solenoid valve");
    CHECK(ingest::normalize_system_name("  Orifice \t\t Plate \n") == "orifice plate");
    CHECK(ingest::normalize_system_name("TEC") == "tec");
    CHECK(ingest::normalize_system_name("a\nb\r\nc") == "a b c");
    CHECK(ingest::normalize_system_name("already normal") == "already normal");
    // Bytes outside ASCII pass through untouched; only ASCII letters fold.
    CHECK(ingest::normalize_system_name("Café  Pump") == "café pump");
}

TEST_CASE("normalization rejects blank names") {
    for (const char* blank : {"", "   ", "\t\n\r "}) {
        CAPTURE(blank);
        try {
            (void)ingest::normalize_system_name(blank);
            FAIL_CHECK("expected EmptyName");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyName);
        }
    }
}

// -----------------------------------------------------------------------
// Bundle assembly and serialization
// -----------------------------------------------------------------------

TEST_CASE("article bodies merge with a blank-line joiner") {
    CHECK(ingest::merge_bodies({}) == "");
    CHECK(ingest::merge_bodies({{"T", "u", "only body", "ts"}}) == "only body");
    CHECK(ingest::merge_bodies({{"A", "u", "first", "ts"}, {"B", "u", "second", "ts"}}) ==
          "first\n\nsecond");
}

TEST_CASE("article spans are code-point ranges into the merged text") {
    ingest::SourceArticle a{"Alpha", "u1", "café one", "ts"};   // 8 code points
    ingest::SourceArticle b{"Beta", "u2", "two \U0001F388", "ts"};   // 5 code points
    ingest::SourceBundle bundle{SystemName::parse("x"), 2, {a, b}, ingest::merge_bodies({a, b})};

    auto spans = bundle.article_spans();
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].title == "Alpha");
    CHECK(spans[0].span.start == 0);
    CHECK(spans[0].span.end == 8);
    CHECK(spans[1].title == "Beta");
    CHECK(spans[1].span.start == 10);  // 8 + the two-code-point joiner
    CHECK(spans[1].span.end == 15);
    CHECK(spans[1].span.end == utf8::length(bundle.merged_text));
    // Slicing the merged text by a span recovers the article body.
    CHECK(utf8::substr(bundle.merged_text, spans[1].span.start, spans[1].span.end) == b.body);
}

TEST_CASE("source bundles round-trip through JSON") {
    auto articles = fixture_articles();
    ingest::SourceBundle bundle{SystemName::parse("solenoid valve"), 2, articles,
                                ingest::merge_bodies(articles)};
    auto j = bundle.to_json();
    CHECK(j.at("system") == "solenoid valve");
    CHECK(j.at("k") == 2);
    REQUIRE(j.at("articles").size() == 2);
    CHECK(j["articles"][0].at("title") == "Solenoid valve");
    CHECK(j["articles"][1].at("url") == "https://example.org/wiki/Solenoid");

    ingest::SourceBundle back = ingest::SourceBundle::from_json(j);
    CHECK(back.system.str() == bundle.system.str());
    CHECK(back.k_articles == bundle.k_articles);
    CHECK(back.articles == bundle.articles);
    CHECK(back.merged_text == bundle.merged_text);
}

// -----------------------------------------------------------------------
// fetch_articles: cache-first retrieval
// -----------------------------------------------------------------------

TEST_CASE("a cold fetch hits the source once and writes the cache file") {
    TempDir cache("ingest");
    StaticKnowledgeSource source(fixture_articles());
    auto system = SystemName::parse("Solenoid Valve");

    ingest::SourceBundle bundle = ingest::fetch_articles(system, 2, source, cache.path());
    CHECK(source.fetches == 1);
    CHECK(bundle.k_articles == 2);
    REQUIRE(bundle.articles.size() == 2);
    CHECK(bundle.merged_text ==
          bundle.articles[0].body + "\n\n" + bundle.articles[1].body);

    auto cache_file = cache.path() / "sources" / "solenoid valve__K2.json";
    REQUIRE(std::filesystem::exists(cache_file));
    std::string raw = read_text_file(cache_file);
    CHECK(raw.back() == '\n');
    CHECK(nlohmann::json::parse(raw).at("k") == 2);

    SUBCASE("a warm fetch is served from the cache without touching the source") {
        ingest::SourceBundle again = ingest::fetch_articles(system, 2, source, cache.path());
        CHECK(source.fetches == 1);
        CHECK(again.articles == bundle.articles);
        CHECK(again.merged_text == bundle.merged_text);
    }
    SUBCASE("a different article count is a separate cache entry") {
        (void)ingest::fetch_articles(system, 1, source, cache.path());
        CHECK(source.fetches == 2);
        CHECK(std::filesystem::exists(cache.path() / "sources" / "solenoid valve__K1.json"));
    }
    SUBCASE("name normalization makes differently-spelled requests share the cache") {
        auto shouted = SystemName::parse("SOLENOID   VALVE");
        (void)ingest::fetch_articles(shouted, 2, source, cache.path());
        CHECK(source.fetches == 1);
    }
}

TEST_CASE("over-delivering sources are trimmed to the requested count") {
    TempDir cache("ingest");
    StaticKnowledgeSource source(fixture_articles());  // always returns two
    auto bundle = ingest::fetch_articles(SystemName::parse("solenoid valve"), 1, source,
                                         cache.path());
    CHECK(bundle.k_articles == 1);
    REQUIRE(bundle.articles.size() == 1);
    CHECK(bundle.articles[0].title == "Solenoid valve");
    CHECK(bundle.merged_text == bundle.articles[0].body);
}

TEST_CASE("fetch failure modes") {
    TempDir cache("ingest");
    auto system = SystemName::parse("anything");

    SUBCASE("an empty search result is NoArticlesFound") {
        StaticKnowledgeSource empty({});
        try {
            (void)ingest::fetch_articles(system, 3, empty, cache.path());
            FAIL("expected NoArticlesFound");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoArticlesFound);
        }
    }
    SUBCASE("source outages propagate") {
        UnreachableKnowledgeSource down;
        try {
            (void)ingest::fetch_articles(system, 3, down, cache.path());
            FAIL("expected SourceUnavailable");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SourceUnavailable);
        }
        CHECK(down.fetches == 1);
    }
    SUBCASE("a corrupt cache file is reported, not silently refetched") {
        std::filesystem::create_directories(cache.path() / "sources");
        std::ofstream(cache.path() / "sources" / "anything__K3.json") << "{nope";
        StaticKnowledgeSource source(fixture_articles());
        try {
            (void)ingest::fetch_articles(system, 3, source, cache.path());
            FAIL("expected CorruptFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CorruptFile);
        }
        CHECK(source.fetches == 0);
    }
    SUBCASE("a non-positive article count is rejected") {
        StaticKnowledgeSource source(fixture_articles());
        try {
            (void)ingest::fetch_articles(system, 0, source, cache.path());
            FAIL("expected InvalidArgument");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidArgument);
        }
    }
}

// -----------------------------------------------------------------------
// Offline fixture source
// -----------------------------------------------------------------------

TEST_CASE("the fixture source replays recorded bundles") {
    TempDir dir("fixture");
    // Record through the normal path so the fixture layout matches reality.
    StaticKnowledgeSource source(fixture_articles());
    auto system = SystemName::parse("solenoid valve");
    (void)ingest::fetch_articles(system, 2, source, dir.path());

    ingest::FixtureKnowledgeSource fixture(dir.path());

    SUBCASE("exact match on the recorded article count") {
        auto articles = fixture.fetch(system, 2);
        CHECK(articles == fixture_articles());
    }
    SUBCASE("a recording made with a different count is reused and trimmed") {
        auto articles = fixture.fetch(system, 1);
        REQUIRE(articles.size() == 1);
        CHECK(articles[0].title == "Solenoid valve");
    }
    SUBCASE("asking for more than was recorded returns what exists") {
        auto articles = fixture.fetch(system, 10);
        CHECK(articles.size() == 2);
    }
    SUBCASE("an unknown system yields an empty result") {
        CHECK(fixture.fetch(SystemName::parse("heat pump"), 2).empty());
    }
    SUBCASE("a corrupt recording is reported") {
        std::ofstream(dir.path() / "sources" / "heat pump__K2.json") << "][";
        try {
            (void)fixture.fetch(SystemName::parse("heat pump"), 2);
            FAIL("expected CorruptFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CorruptFile);
        }
    }
}

}  // TEST_SUITE
