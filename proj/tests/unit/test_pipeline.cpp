/// @file test_pipeline.cpp
/// @brief Workflow orchestration: config validation, query transformation,
///        retrieval, trial selection, index caching, end-to-end generation,
///        and artifact round-trips.
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "sapphire/pipeline.hpp"
#include "sapphire/textio.hpp"
#include "support/doubles.hpp"
#include "support/temp_dir.hpp"

using namespace sapphire;
using sapphire::testing::CannedChatProvider;
using sapphire::testing::CountingChatProvider;
using sapphire::testing::CountingEmbeddingProvider;
using sapphire::testing::FailingChatProvider;
using sapphire::testing::ScriptedChatProvider;
using sapphire::testing::StaticKnowledgeSource;
using sapphire::testing::TempDir;
using sapphire::testing::fixture_articles;

namespace {

/// Small, fast defaults for the fixture corpus.
pipeline::PipelineConfig test_config() {
    pipeline::PipelineConfig config;
    config.k_articles = 2;
    config.top_k = 3;
    config.chunk_size = 160;
    config.chunk_overlap = 32;
    config.trials = 3;
    config.sequential = true;  // deterministic call order for scripted doubles
    return config;
}

pipeline::ProviderSet canned_providers(std::shared_ptr<llm::ChatProvider> chat) {
    return {std::make_shared<StaticKnowledgeSource>(fixture_articles()),
            std::make_shared<vecstore::LocalHashEmbeddingProvider>(64), std::move(chat)};
}

/// Delegates to a canned provider but fails the nth hypothetical-model
/// request with a backend error (so exactly that trial fails).
class FailNthHypothesisProvider : public llm::ChatProvider {
public:
    explicit FailNthHypothesisProvider(int fail_on) : fail_on_(fail_on) {}

    std::string complete(const llm::ChatRequest& request) override {
        if (request.prompt.find("Think step by step to generate appropriate knowledge") !=
            std::string::npos) {
            if (++hypothesis_calls_ == fail_on_) {
                throw Error(ErrorCode::ProviderError, "hypothesis backend hiccup");
            }
        }
        return inner_.complete(request);
    }

private:
    CannedChatProvider inner_;
    int fail_on_;
    int hypothesis_calls_ = 0;
};

}  // namespace

TEST_SUITE("pipeline") {

// -----------------------------------------------------------------------
// Configuration
// -----------------------------------------------------------------------

TEST_CASE("config validation rejects each out-of-range knob") {
    pipeline::PipelineConfig good;
    CHECK_NOTHROW(good.validate());

    auto expect_invalid = [](pipeline::PipelineConfig config, const std::string& field) {
        CAPTURE(field);
        try {
            config.validate();
            FAIL_CHECK("expected InvalidConfig for " << field);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidConfig);
        }
    };

    pipeline::PipelineConfig c = good;
    c.k_articles = 0;
    expect_invalid(c, "k_articles");
    c = good;
    c.top_k = 0;
    expect_invalid(c, "top_k");
    c = good;
    c.chunk_size = 0;
    expect_invalid(c, "chunk_size");
    c = good;
    c.chunk_overlap = c.chunk_size;
    expect_invalid(c, "chunk_overlap");
    c = good;
    c.trials = 0;
    expect_invalid(c, "trials");
    c = good;
    c.temperature = -0.1;
    expect_invalid(c, "temperature");
    c = good;
    c.parse_retries = -1;
    expect_invalid(c, "parse_retries");
    c = good;
    c.http_attempts = 0;
    expect_invalid(c, "http_attempts");
    c = good;
    c.concurrency = 0;
    expect_invalid(c, "concurrency");
    c = good;
    c.judge_model.clear();
    expect_invalid(c, "judge_model");
}

// -----------------------------------------------------------------------
// Query transformation
// -----------------------------------------------------------------------

TEST_CASE("transformed queries append the hypothetical answer after a space") {
    auto query = query_for(ConstructKind::Input);
    auto tq = pipeline::transform_query(query, "Electric current through the coil.");
    CHECK(tq.kind == ConstructKind::Input);
    CHECK(tq.text == query.text + " Electric current through the coil.");
    // Prefix property: the original query text always leads.
    CHECK(tq.text.rfind(query.text, 0) == 0);
    CHECK(tq.text[query.text.size()] == ' ');
}

TEST_CASE("a blank hypothetical answer cannot be embedded") {
    for (const char* blank : {"", "  ", "\n\t"}) {
        CAPTURE(blank);
        try {
            (void)pipeline::transform_query(query_for(ConstructKind::Organ), blank);
            FAIL_CHECK("expected EmptyHypothetical");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyHypothetical);
            CHECK(std::string(e.what()).find("Organ") != std::string::npos);
        }
    }
}

// -----------------------------------------------------------------------
// Retrieval
// -----------------------------------------------------------------------

TEST_CASE("retrieval returns score-ordered chunks bounded by top_k") {
    vecstore::LocalHashEmbeddingProvider embedder(64);
    chunker::ChunkCorpus corpus = chunker::split_text(
        "The solenoid coil creates a magnetic field.\n\nThe plunger opens the orifice.\n\n"
        "Washing machines use solenoid valves.\n\nIrrigation systems are a common application.",
        60, 0);
    REQUIRE(corpus.chunks.size() >= 4);

    vecstore::EmbeddedIndex index;
    index.provider_id = embedder.id();
    std::vector<std::string> texts;
    for (const auto& chunk : corpus.chunks) texts.push_back(chunk.text);
    auto vectors = vecstore::embed_texts(texts, embedder);
    for (std::size_t i = 0; i < corpus.chunks.size(); ++i) {
        index.add(corpus.chunks[i].id, std::move(vectors[i]));
    }

    pipeline::TransformedQuery tq{ConstructKind::Part,
                                  "What parts does it have? coil plunger orifice"};
    pipeline::RetrievedContext context = pipeline::retrieve_context(tq, index, corpus, 2, embedder);

    CHECK(context.kind == ConstructKind::Part);
    REQUIRE(context.chunks.size() == 2);
    REQUIRE(context.scores.size() == 2);
    CHECK(context.scores[0] >= context.scores[1]);
    // The chunk texts travel with the hits.
    for (const auto& chunk : context.chunks) CHECK(!chunk.text.empty());

    SUBCASE("asking for more than the corpus holds returns everything") {
        auto all = pipeline::retrieve_context(tq, index, corpus, 100, embedder);
        CHECK(all.chunks.size() == corpus.chunks.size());
    }
    SUBCASE("an index from a different embedding space is rejected") {
        vecstore::LocalHashEmbeddingProvider other(32);
        try {
            (void)pipeline::retrieve_context(tq, index, corpus, 2, other);
            FAIL("expected InvalidConfig");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidConfig);
            CHECK(std::string(e.what()).find(embedder.id()) != std::string::npos);
        }
    }
}

// -----------------------------------------------------------------------
// Trial scoring and selection
// -----------------------------------------------------------------------

namespace {

pipeline::TrialRecord trial_with(int index, ConstructMap<eval::TriadScores> scores) {
    SystemName system = SystemName::parse("fixture system");
    return pipeline::TrialRecord{index, HypotheticalModel{system, {}}, {},
                                 SapphireModel{system, {}}, std::move(scores)};
}

}  // namespace

TEST_CASE("trial means skip absent cells") {
    ConstructMap<eval::TriadScores> scores;
    scores[ConstructKind::StateChange] = {1.0, std::nullopt, 0.5};
    scores[ConstructKind::Effect] = {std::nullopt, 0.3, std::nullopt};
    CHECK(pipeline::mean_of_scores(scores) == doctest::Approx((1.0 + 0.5 + 0.3) / 3.0));

    ConstructMap<eval::TriadScores> empty;
    CHECK(!pipeline::mean_of_scores(empty).has_value());

    pipeline::TrialRecord trial = trial_with(4, scores);
    CHECK(pipeline::trial_mean_score(trial) == pipeline::mean_of_scores(scores));
}

TEST_CASE("the best trial has the highest mean; ties go to the lowest index") {
    ConstructMap<eval::TriadScores> low;
    low[ConstructKind::Action].groundedness = 0.2;
    ConstructMap<eval::TriadScores> high;
    high[ConstructKind::Action].groundedness = 0.9;

    SUBCASE("plain argmax") {
        std::vector<pipeline::TrialRecord> trials{trial_with(0, low), trial_with(1, high),
                                                  trial_with(2, low)};
        CHECK(pipeline::select_best_trial(trials) == 1);
    }
    SUBCASE("tie resolves to the lowest trial index") {
        std::vector<pipeline::TrialRecord> trials{trial_with(3, high), trial_with(1, high),
                                                  trial_with(2, high)};
        CHECK(pipeline::select_best_trial(trials) == 1);  // position of trial_index 1
    }
    SUBCASE("unscored trials lose to any scored trial") {
        ConstructMap<eval::TriadScores> none;
        std::vector<pipeline::TrialRecord> trials{trial_with(0, none), trial_with(1, low)};
        CHECK(pipeline::select_best_trial(trials) == 1);
    }
    SUBCASE("all-unscored runs select the lowest trial index") {
        ConstructMap<eval::TriadScores> none;
        std::vector<pipeline::TrialRecord> trials{trial_with(5, none), trial_with(2, none),
                                                  trial_with(7, none)};
        CHECK(pipeline::select_best_trial(trials) == 1);
    }
    SUBCASE("no trials at all is AllTrialsFailed") {
        try {
            (void)pipeline::select_best_trial({});
            FAIL("expected AllTrialsFailed");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::AllTrialsFailed);
        }
    }
}

TEST_CASE("trial selection matches a brute-force oracle") {
    std::mt19937 rng(20250817);
    std::uniform_int_distribution<int> trial_count(1, 12);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::bernoulli_distribution present(0.4);

    for (int iteration = 0; iteration < 150; ++iteration) {
        int n = trial_count(rng);
        std::vector<pipeline::TrialRecord> trials;
        for (int t = 0; t < n; ++t) {
            ConstructMap<eval::TriadScores> scores;
            for (ConstructKind kind : all_constructs()) {
                if (present(rng)) scores[kind].groundedness = score(rng);
                if (present(rng)) scores[kind].answer_relevance = score(rng);
                if (present(rng)) scores[kind].context_relevance = score(rng);
            }
            trials.push_back(trial_with(t, std::move(scores)));
        }

        std::size_t expected = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < trials.size(); ++i) {
            double mean = pipeline::trial_mean_score(trials[i])
                              .value_or(-std::numeric_limits<double>::infinity());
            if (mean > best) {
                best = mean;
                expected = i;
            }
        }
        CAPTURE(iteration);
        CHECK(pipeline::select_best_trial(trials) == expected);
    }
}

// -----------------------------------------------------------------------
// Hypothetical-model generation with parse retries
// -----------------------------------------------------------------------

TEST_CASE("malformed hypothetical output is regenerated up to the retry budget") {
    auto config = test_config();
    config.parse_retries = 2;
    auto system = SystemName::parse("solenoid valve");
    auto assets = llm::PromptAssets::defaults();

    std::string valid = R"({"StateChanges":"s","Actions":"a","Parts":"p","Phenomena":"ph",
                            "Inputs":"i","Organs":"o","Effects":"e"})";

    SUBCASE("second attempt succeeds") {
        ScriptedChatProvider chat({"not json", valid});
        auto model = pipeline::generate_hypothetical_model(system, config, chat, assets);
        CHECK(model.answers[ConstructKind::Action] == "a");
        CHECK(chat.prompts.size() == 2);
        CHECK(chat.prompts[0] == chat.prompts[1]);  // same prompt, fresh sample
    }
    SUBCASE("budget exhausted is a failed trial") {
        ScriptedChatProvider chat({"junk", "more junk", "{\"still\": \"wrong\"}"});
        try {
            (void)pipeline::generate_hypothetical_model(system, config, chat, assets);
            FAIL("expected TrialFailed");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TrialFailed);
            CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
        }
        CHECK(chat.prompts.size() == 3);
    }
    SUBCASE("backend failures are not retried here") {
        FailingChatProvider chat;
        try {
            (void)pipeline::generate_hypothetical_model(system, config, chat, assets);
            FAIL("expected ProviderError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ProviderError);
        }
        CHECK(chat.calls == 1);
    }
}

// -----------------------------------------------------------------------
// Knowledge-index caching
// -----------------------------------------------------------------------

TEST_CASE("a warm cache serves the index with zero provider calls") {
    TempDir cache("pipecache");
    auto config = test_config();
    auto system = SystemName::parse("solenoid valve");

    auto source = std::make_shared<StaticKnowledgeSource>(fixture_articles());
    auto embedder = std::make_shared<CountingEmbeddingProvider>(
        std::make_shared<vecstore::LocalHashEmbeddingProvider>(64));
    pipeline::ProviderSet providers{source, embedder, std::make_shared<CannedChatProvider>()};

    auto [corpus_cold, index_cold] =
        pipeline::build_knowledge_index(system, config, providers, cache.path());
    CHECK(source->fetches == 1);
    CHECK(embedder->texts_embedded == static_cast<int>(corpus_cold.chunks.size()));
    CHECK(index_cold.entries.size() == corpus_cold.chunks.size());
    CHECK(index_cold.provider_id == "local-hash-64");

    auto index_file = cache.path() / "index" / "solenoid valve__K2.idx";
    CHECK(std::filesystem::exists(index_file));
    CHECK(std::filesystem::exists(cache.path() / "index" / "solenoid valve__K2.idx.meta.json"));

    SUBCASE("second build reads everything from disk") {
        auto fresh_source = std::make_shared<StaticKnowledgeSource>(fixture_articles());
        auto fresh_embedder = std::make_shared<CountingEmbeddingProvider>(
            std::make_shared<vecstore::LocalHashEmbeddingProvider>(64));
        pipeline::ProviderSet warm{fresh_source, fresh_embedder,
                                   std::make_shared<CannedChatProvider>()};
        auto [corpus_warm, index_warm] =
            pipeline::build_knowledge_index(system, config, warm, cache.path());
        CHECK(fresh_source->fetches == 0);
        CHECK(fresh_embedder->texts_embedded == 0);
        CHECK(index_warm == index_cold);
        CHECK(corpus_warm.chunks.size() == corpus_cold.chunks.size());
    }
    SUBCASE("changing the chunking invalidates the cached index") {
        auto changed = config;
        changed.chunk_size = 120;
        auto fresh_embedder = std::make_shared<CountingEmbeddingProvider>(
            std::make_shared<vecstore::LocalHashEmbeddingProvider>(64));
        pipeline::ProviderSet again{source, fresh_embedder,
                                    std::make_shared<CannedChatProvider>()};
        auto [corpus_new, index_new] =
            pipeline::build_knowledge_index(system, changed, again, cache.path());
        CHECK(fresh_embedder->texts_embedded == static_cast<int>(corpus_new.chunks.size()));
    }
    SUBCASE("changing the embedding provider invalidates the cached index") {
        auto fresh_embedder = std::make_shared<CountingEmbeddingProvider>(
            std::make_shared<vecstore::LocalHashEmbeddingProvider>(32));
        pipeline::ProviderSet again{source, fresh_embedder,
                                    std::make_shared<CannedChatProvider>()};
        auto [corpus_new, index_new] =
            pipeline::build_knowledge_index(system, config, again, cache.path());
        CHECK(fresh_embedder->texts_embedded > 0);
        CHECK(index_new.provider_id == "local-hash-32");
    }
}

// -----------------------------------------------------------------------
// Trials and full runs
// -----------------------------------------------------------------------

TEST_CASE("a trial fills every construct and judges it") {
    TempDir cache("pipetrial");
    auto config = test_config();
    auto chat = std::make_shared<CannedChatProvider>();
    auto providers = canned_providers(chat);
    auto system = SystemName::parse("solenoid valve");
    auto assets = llm::PromptAssets::defaults();

    auto [corpus, index] = pipeline::build_knowledge_index(system, config, providers,
                                                           cache.path());
    pipeline::TrialRecord trial =
        pipeline::run_trial(system, corpus, index, config, providers, assets, 5);

    CHECK(trial.trial_index == 5);
    for (ConstructKind kind : all_constructs()) {
        CAPTURE(construct_name(kind));
        CHECK(!trial.hypothetical.answers[kind].empty());
        CHECK(!trial.corrected.answers[kind].empty());
        CHECK(trial.contexts[kind].kind == kind);
        CHECK(!trial.contexts[kind].chunks.empty());
        CHECK(trial.contexts[kind].chunks.size() <=
              static_cast<std::size_t>(config.top_k));
        CHECK(trial.contexts[kind].chunks.size() == trial.contexts[kind].scores.size());
        CHECK(trial.scores[kind].answer_relevance.has_value());
        CHECK(trial.scores[kind].context_relevance.has_value());
    }

    SUBCASE("judge outages leave scores absent without failing the trial") {
        chat->fail_judges = true;
        pipeline::TrialRecord unjudged =
            pipeline::run_trial(system, corpus, index, config, providers, assets, 6);
        for (ConstructKind kind : all_constructs()) {
            CHECK(unjudged.scores[kind] == eval::TriadScores{});
            CHECK(!unjudged.corrected.answers[kind].empty());
        }
    }
}

TEST_CASE("a full run writes a complete artifact") {
    TempDir cache("pipegen");
    TempDir out("pipeout");
    auto config = test_config();
    auto providers = canned_providers(std::make_shared<CannedChatProvider>());
    auto system = SystemName::parse("Solenoid  Valve");
    auto assets = llm::PromptAssets::defaults();

    pipeline::GenerateOutcome outcome = pipeline::run_generate(
        system, config, providers, assets, cache.path(), out.path(), true);

    CHECK(outcome.trials.size() == 3);
    CHECK(outcome.failed_trials.empty());
    CHECK(outcome.selected < outcome.trials.size());
    CHECK(outcome.artifact_path == out.path() / "run_solenoid_valve_replay.json");
    REQUIRE(std::filesystem::exists(outcome.artifact_path));

    const auto& artifact = outcome.artifact;
    CHECK(artifact.at("system") == "Solenoid  Valve");
    CHECK(artifact.at("config").at("k_articles") == 2);
    CHECK(artifact.at("config").at("embedding_provider") == "local-hash-64");
    REQUIRE(artifact.at("trials").is_array());
    CHECK(artifact.at("trials").size() == 3);
    CHECK(artifact.at("failed_trials").empty());
    CHECK(artifact.at("selected_trial_index") ==
          outcome.trials[outcome.selected].trial_index);

    const auto& first = artifact.at("trials").at(0);
    CHECK(first.at("trial_index") == 0);
    CHECK(first.at("hypothetical").size() == kConstructCount);
    CHECK(first.at("contexts").size() == kConstructCount);
    CHECK(first.at("scores").size() == kConstructCount);
    CHECK(first.at("corrected").at("constructs").size() == kConstructCount);
    const auto& context_entry = first.at("contexts").at("StateChange").at(0);
    CHECK(context_entry.contains("chunk_id"));
    CHECK(context_entry.contains("score"));
    CHECK(context_entry.contains("source_title"));
    CHECK(context_entry.contains("text"));

    // The embedded model is the selected trial's corrected model.
    CHECK(artifact.at("model") == outcome.trials[outcome.selected].corrected.to_json());

    SUBCASE("the artifact loads and its trials parse back") {
        auto loaded = pipeline::load_artifact(outcome.artifact_path);
        CHECK(loaded == artifact);

        auto views = pipeline::parse_artifact_trials(loaded);
        REQUIRE(views.size() == outcome.trials.size());
        for (std::size_t i = 0; i < views.size(); ++i) {
            CHECK(views[i].trial_index == outcome.trials[i].trial_index);
            for (ConstructKind kind : all_constructs()) {
                CHECK(views[i].corrected[kind] == outcome.trials[i].corrected.answers[kind]);
                CHECK(views[i].scores[kind] == outcome.trials[i].scores[kind]);
                REQUIRE(views[i].contexts[kind].chunks.size() ==
                        outcome.trials[i].contexts[kind].chunks.size());
                for (std::size_t c = 0; c < views[i].contexts[kind].chunks.size(); ++c) {
                    CHECK(views[i].contexts[kind].chunks[c].id ==
                          outcome.trials[i].contexts[kind].chunks[c].id);
                    CHECK(views[i].contexts[kind].chunks[c].text ==
                          outcome.trials[i].contexts[kind].chunks[c].text);
                }
            }
        }
    }
}

TEST_CASE("a failing trial is recorded and skipped, not fatal") {
    TempDir cache("pipefail");
    TempDir out("pipefailout");
    auto config = test_config();
    // The second hypothetical request fails once -> trial index 1 fails.
    auto providers = canned_providers(std::make_shared<FailNthHypothesisProvider>(2));
    auto system = SystemName::parse("solenoid valve");

    pipeline::GenerateOutcome outcome =
        pipeline::run_generate(system, config, providers, llm::PromptAssets::defaults(),
                               cache.path(), out.path(), true);
    CHECK(outcome.trials.size() == 2);
    CHECK(outcome.failed_trials == std::vector<int>{1});
    CHECK(outcome.trials[0].trial_index == 0);
    CHECK(outcome.trials[1].trial_index == 2);
    CHECK(outcome.artifact.at("failed_trials") == std::vector<int>{1});
}

TEST_CASE("a run where every trial fails raises AllTrialsFailed") {
    TempDir cache("pipeallfail");
    TempDir out("pipeallfailout");
    auto config = test_config();
    auto providers = canned_providers(std::make_shared<FailingChatProvider>());

    try {
        (void)pipeline::run_generate(SystemName::parse("solenoid valve"), config, providers,
                                     llm::PromptAssets::defaults(), cache.path(), out.path(),
                                     true);
        FAIL("expected AllTrialsFailed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllTrialsFailed);
    }
}

// -----------------------------------------------------------------------
// Artifact loading errors
// -----------------------------------------------------------------------

TEST_CASE("artifact loading failure modes") {
    TempDir dir("artifacts");

    SUBCASE("missing file") {
        try {
            (void)pipeline::load_artifact(dir / "absent.json");
            FAIL("expected IoError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IoError);
        }
    }
    SUBCASE("invalid JSON") {
        std::ofstream(dir / "bad.json") << "{{{{";
        try {
            (void)pipeline::load_artifact(dir / "bad.json");
            FAIL("expected ArtifactParseError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ArtifactParseError);
        }
    }
    SUBCASE("valid JSON that is not a run artifact") {
        std::ofstream(dir / "other.json") << R"({"hello": "world"})";
        try {
            (void)pipeline::load_artifact(dir / "other.json");
            FAIL("expected ArtifactParseError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ArtifactParseError);
            CHECK(std::string(e.what()).find("other.json") != std::string::npos);
        }
    }
    SUBCASE("malformed trial entries") {
        nlohmann::ordered_json artifact;
        artifact["trials"] = nlohmann::ordered_json::array();
        artifact["trials"].push_back({{"trial_index", 0}});  // everything else missing
        try {
            (void)pipeline::parse_artifact_trials(artifact);
            FAIL("expected ArtifactParseError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ArtifactParseError);
        }
    }
}

}  // TEST_SUITE
