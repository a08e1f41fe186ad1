/// @file cli.cpp
/// @brief Config resolution, provider wiring, and command implementations.
#include "sapphire/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sapphire/ingest.hpp"
#include "sapphire/textio.hpp"
#include "sapphire/triad_eval.hpp"
#include "sapphire/vecstore.hpp"

namespace sapphire::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config resolution
// ---------------------------------------------------------------------------

namespace {

const nlohmann::json* find_key(const nlohmann::json& obj, const char* key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

[[noreturn]] void bad_key(const char* key, const char* expected) {
    throw Error(ErrorCode::InvalidConfig,
                std::string("config key '") + key + "' must be " + expected);
}

void load_string(const nlohmann::json& obj, const char* key, std::string& target) {
    if (const auto* v = find_key(obj, key)) {
        if (!v->is_string()) bad_key(key, "a string");
        target = v->get<std::string>();
    }
}

void load_path(const nlohmann::json& obj, const char* key, fs::path& target) {
    std::string value;
    load_string(obj, key, value);
    if (!value.empty()) target = value;
}

void load_int(const nlohmann::json& obj, const char* key, int& target) {
    if (const auto* v = find_key(obj, key)) {
        if (!v->is_number_integer()) bad_key(key, "an integer");
        target = v->get<int>();
    }
}

void load_size(const nlohmann::json& obj, const char* key, std::size_t& target) {
    if (const auto* v = find_key(obj, key)) {
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
            bad_key(key, "a non-negative integer");
        }
        target = v->get<std::size_t>();
    }
}

void load_double(const nlohmann::json& obj, const char* key, double& target) {
    if (const auto* v = find_key(obj, key)) {
        if (!v->is_number()) bad_key(key, "a number");
        target = v->get<double>();
    }
}

void apply_config_file(AppConfig& config, const fs::path& path) {
    if (!fs::exists(path)) {
        throw Error(ErrorCode::InvalidConfig, "config file not found: " + path.string());
    }
    nlohmann::json doc =
        nlohmann::json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::InvalidConfig, "config file is not a JSON object: " + path.string());
    }

    load_string(doc, "wiki_api_url", config.wiki_api_url);
    load_path(doc, "cache_dir", config.cache_dir);
    load_path(doc, "out_dir", config.out_dir);
    load_string(doc, "format", config.format);

    if (const auto* chat = find_key(doc, "chat")) {
        load_string(*chat, "base_url", config.chat_base_url);
        load_string(*chat, "api_key_env", config.chat_api_key_env);
    }
    if (const auto* embedding = find_key(doc, "embedding")) {
        load_string(*embedding, "provider", config.embedding_provider);
        load_string(*embedding, "model", config.embedding_model);
        load_size(*embedding, "local_dim", config.embedding_local_dim);
        load_string(*embedding, "base_url", config.embedding_base_url);
        load_string(*embedding, "api_key_env", config.embedding_api_key_env);
    }
    if (const auto* models = find_key(doc, "models")) {
        load_string(*models, "hypothesis", config.pipeline.hypothesis_model);
        load_string(*models, "correction", config.pipeline.correction_model);
        load_string(*models, "judge", config.pipeline.judge_model);
    }
    if (const auto* knobs = find_key(doc, "pipeline")) {
        load_int(*knobs, "k_articles", config.pipeline.k_articles);
        load_int(*knobs, "top_k", config.pipeline.top_k);
        load_size(*knobs, "chunk_size", config.pipeline.chunk_size);
        load_size(*knobs, "chunk_overlap", config.pipeline.chunk_overlap);
        load_int(*knobs, "trials", config.pipeline.trials);
        load_double(*knobs, "temperature", config.pipeline.temperature);
        load_int(*knobs, "parse_retries", config.pipeline.parse_retries);
        load_int(*knobs, "http_attempts", config.pipeline.http_attempts);
        load_int(*knobs, "concurrency", config.pipeline.concurrency);
    }
    if (const auto* assets = find_key(doc, "assets")) {
        auto load_asset = [&](const char* key, std::string& target) {
            fs::path asset_path;
            load_path(*assets, key, asset_path);
            if (asset_path.empty()) return;
            try {
                target = read_text_file(asset_path);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidConfig,
                            std::string("cannot read asset file for '") + key + "': " + e.what());
            }
        };
        load_asset("definitions", config.assets.definitions);
        load_asset("reasoning_steps", config.assets.reasoning_steps);
        load_asset("format_instructions", config.assets.format_instructions);
        load_asset("judge_groundedness", config.assets.judge_groundedness);
        load_asset("judge_answer_relevance", config.assets.judge_answer_relevance);
        load_asset("judge_context_relevance", config.assets.judge_context_relevance);
    }
}

std::string require_env(const std::string& name) {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr || *value == '\0') {
        throw Error(ErrorCode::InvalidConfig, "environment variable " + name +
                                                  " is not set (required for live providers)");
    }
    return value;
}

}  // namespace

fs::path AppConfig::fixture_dir() const {
    return replay() ? replay_dir : cache_dir / "fixtures";
}

fs::path AppConfig::effective_cache_dir() const {
    if (replay()) return replay_dir;
    if (record) return fixture_dir();
    return cache_dir;
}

AppConfig resolve_config(const GlobalFlags& flags) {
    AppConfig config;

    if (const char* env_cache = std::getenv("SAPPHIRE_CACHE_DIR");
        env_cache != nullptr && *env_cache != '\0') {
        config.cache_dir = env_cache;
    }
    if (flags.config_path) apply_config_file(config, *flags.config_path);

    if (flags.cache_dir) config.cache_dir = *flags.cache_dir;
    if (flags.replay_dir) config.replay_dir = *flags.replay_dir;
    config.record = config.record || flags.record;
    if (flags.k_articles) config.pipeline.k_articles = *flags.k_articles;
    if (flags.top_k) config.pipeline.top_k = *flags.top_k;
    if (flags.chunk_size) config.pipeline.chunk_size = *flags.chunk_size;
    if (flags.chunk_overlap) config.pipeline.chunk_overlap = *flags.chunk_overlap;
    if (flags.trials) config.pipeline.trials = *flags.trials;
    if (flags.out_dir) config.out_dir = *flags.out_dir;
    if (flags.format) config.format = *flags.format;

    if (config.format != "json" && config.format != "markdown") {
        throw Error(ErrorCode::InvalidConfig,
                    "format must be 'json' or 'markdown', got '" + config.format + "'");
    }
    if (config.embedding_provider != "openai" && config.embedding_provider != "local") {
        throw Error(ErrorCode::InvalidConfig, "embedding provider must be 'openai' or 'local', got '" +
                                                  config.embedding_provider + "'");
    }
    if (config.record && config.replay()) {
        throw Error(ErrorCode::InvalidConfig, "--record cannot be combined with --replay");
    }
    // Replay must see requests in a stable order to match recorded fixtures.
    if (config.replay()) config.pipeline.sequential = true;
    config.pipeline.validate();
    return config;
}

pipeline::ProviderSet make_providers(const AppConfig& config) {
    pipeline::ProviderSet providers;
    if (config.replay()) {
        providers.source = std::make_shared<ingest::FixtureKnowledgeSource>(config.replay_dir);
        providers.embedder =
            std::make_shared<vecstore::ReplayEmbeddingProvider>(config.replay_dir / "embeddings.jsonl");
        providers.chat =
            std::make_shared<llm::ReplayChatProvider>(config.replay_dir / "chat.jsonl");
        return providers;
    }

    providers.source = std::make_shared<ingest::WikiHttpClient>(config.wiki_api_url,
                                                                config.pipeline.http_attempts);
    if (config.embedding_provider == "local") {
        providers.embedder =
            std::make_shared<vecstore::LocalHashEmbeddingProvider>(config.embedding_local_dim);
    } else {
        providers.embedder = std::make_shared<vecstore::OpenAiEmbeddingClient>(
            config.embedding_base_url, config.embedding_model,
            require_env(config.embedding_api_key_env), config.pipeline.http_attempts);
    }
    providers.chat = std::make_shared<llm::OpenAiChatClient>(
        config.chat_base_url, require_env(config.chat_api_key_env), config.pipeline.http_attempts);

    if (config.record) {
        fs::path dir = config.fixture_dir();
        providers.embedder = std::make_shared<vecstore::RecordingEmbeddingProvider>(
            providers.embedder, dir / "embeddings.jsonl");
        providers.chat =
            std::make_shared<llm::RecordingChatProvider>(providers.chat, dir / "chat.jsonl");
    }
    return providers;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_model_markdown(const SapphireModel& model) {
    std::string doc = "# SAPPhIRE model: " + model.system.str() + "\n";
    for (ConstructKind kind : all_constructs()) {
        doc += "\n## ";
        doc += construct_display_name(kind);
        doc += "\n\n";
        doc += model.answers[kind];
        doc += "\n";
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_ingest(const AppConfig& config, const pipeline::ProviderSet& providers,
               const std::string& system_raw, std::ostream& out) {
    SystemName system = SystemName::parse(system_raw);
    fs::path cache = config.effective_cache_dir();
    std::string norm = ingest::normalize_system_name(system.str());
    std::string suffix = "__K" + std::to_string(config.pipeline.k_articles);
    bool source_hit = fs::exists(cache / "sources" / (norm + suffix + ".json"));
    bool index_hit = fs::exists(cache / "index" / (norm + suffix + ".idx"));

    auto [corpus, index] = pipeline::build_knowledge_index(system, config.pipeline, providers, cache);
    fs::path index_path = cache / "index" / (norm + suffix + ".idx");

    // Article count comes from the cached bundle rather than the corpus.
    ingest::SourceBundle bundle = ingest::SourceBundle::from_json(nlohmann::json::parse(
        read_text_file(cache / "sources" / (norm + suffix + ".json"))));
    int articles = static_cast<int>(bundle.articles.size());

    if (config.format == "json") {
        json summary;
        summary["system"] = system.str();
        summary["articles"] = articles;
        summary["chunks"] = corpus.size();
        summary["index_entries"] = index.entries.size();
        summary["index_path"] = index_path.string();
        summary["source_cache_hit"] = source_hit;
        summary["index_cache_hit"] = index_hit;
        out << summary.dump(2) << "\n";
    } else {
        out << "system: " << system.str() << "\n";
        out << "articles: " << articles << " (source cache: " << (source_hit ? "hit" : "miss")
            << ")\n";
        out << "chunks: " << corpus.size() << "\n";
        out << "index: " << index_path.string() << " (entries: " << index.entries.size()
            << ", cache: " << (index_hit ? "hit" : "miss") << ")\n";
    }
    return 0;
}

int cmd_generate(const AppConfig& config, const pipeline::ProviderSet& providers,
                 const std::string& system_raw, std::ostream& out) {
    SystemName system = SystemName::parse(system_raw);
    pipeline::GenerateOutcome outcome =
        pipeline::run_generate(system, config.pipeline, providers, config.assets,
                               config.effective_cache_dir(), config.out_dir, config.replay());
    const pipeline::TrialRecord& best = outcome.trials[outcome.selected];

    // The model file shares the artifact's stem: run_X.json -> model_X.<ext>.
    std::string artifact_name = outcome.artifact_path.filename().string();
    std::string stem = artifact_name.substr(4, artifact_name.size() - 4 - 5);
    fs::path model_path =
        config.out_dir / ("model_" + stem + (config.format == "markdown" ? ".md" : ".json"));
    if (config.format == "markdown") {
        write_text_file(model_path, render_model_markdown(best.corrected));
    } else {
        write_text_file(model_path, best.corrected.to_json().dump(2) + "\n");
    }

    if (config.format == "json") {
        json summary;
        summary["system"] = system.str();
        summary["artifact"] = outcome.artifact_path.string();
        summary["model_file"] = model_path.string();
        summary["trials"] = outcome.trials.size();
        summary["failed_trials"] = outcome.failed_trials;
        summary["selected_trial_index"] = best.trial_index;
        summary["model"] = best.corrected.to_json();
        out << summary.dump(2) << "\n";
    } else {
        out << render_model_markdown(best.corrected);
    }
    return 0;
}

namespace {

json scores_cell_to_json(const eval::TriadScores& scores) {
    auto value_or_null = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json j;
    j["groundedness"] = value_or_null(scores.groundedness);
    j["answer_relevance"] = value_or_null(scores.answer_relevance);
    j["context_relevance"] = value_or_null(scores.context_relevance);
    return j;
}

}  // namespace

int cmd_evaluate(const AppConfig& config, const pipeline::ProviderSet& providers,
                 const std::string& artifact_path, std::ostream& out) {
    fs::path path(artifact_path);
    json artifact = pipeline::load_artifact(path);
    std::vector<pipeline::ArtifactTrialView> views = pipeline::parse_artifact_trials(artifact);
    if (views.empty()) {
        throw Error(ErrorCode::ArtifactParseError, "run artifact has no trials: " + artifact_path);
    }

    eval::JudgeConfig judge{config.pipeline.judge_model, config.pipeline.temperature};
    std::vector<ConstructMap<eval::TriadScores>> trial_scores;
    for (auto& view : views) {
        for (ConstructKind kind : all_constructs()) {
            view.scores[kind] = eval::judge_all(query_for(kind), view.corrected[kind],
                                                view.contexts[kind], *providers.chat, judge,
                                                config.assets);
        }
        trial_scores.push_back(view.scores);
    }

    // Fold the fresh scores back in and reselect the best trial.
    std::size_t best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < views.size(); ++i) {
        json scores;
        for (ConstructKind kind : all_constructs()) {
            scores[std::string(construct_name(kind))] = scores_cell_to_json(views[i].scores[kind]);
        }
        artifact["trials"][i]["scores"] = std::move(scores);

        std::optional<double> mean = pipeline::mean_of_scores(views[i].scores);
        double value = mean ? *mean : -std::numeric_limits<double>::infinity();
        if (value > best_mean) {
            best_mean = value;
            best = i;
        }
    }
    artifact["selected_trial_index"] = views[best].trial_index;
    artifact["model"] = artifact["trials"][best]["corrected"];
    write_text_file(path, artifact.dump(2) + "\n");

    eval::Report report = eval::build_report(trial_scores);
    if (config.format == "json") {
        json summary;
        summary["artifact"] = path.string();
        summary["selected_trial_index"] = views[best].trial_index;
        summary["report"] = eval::report_to_json(report);
        out << summary.dump(2) << "\n";
    } else {
        out << "re-scored artifact: " << path.string() << "\n";
        out << "selected trial: " << views[best].trial_index << "\n\n";
        out << eval::render_report_markdown(report);
    }
    return 0;
}

int cmd_report(const AppConfig& config, const std::vector<std::string>& artifact_paths,
               std::ostream& out) {
    if (artifact_paths.empty()) {
        throw Error(ErrorCode::InvalidArgument, "report needs at least one run artifact");
    }
    std::vector<ConstructMap<eval::TriadScores>> trial_scores;
    for (const std::string& path : artifact_paths) {
        json artifact = pipeline::load_artifact(path);
        for (const auto& view : pipeline::parse_artifact_trials(artifact)) {
            trial_scores.push_back(view.scores);
        }
    }
    eval::Report report = eval::build_report(trial_scores);
    if (config.format == "json") {
        out << eval::report_to_json(report).dump(2) << "\n";
    } else {
        out << eval::render_report_markdown(report);
    }
    return 0;
}

int exit_code_for(const Error& error) {
    switch (error.code()) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptyName:
            return 3;
        case ErrorCode::SourceUnavailable:
            return 4;
        case ErrorCode::NoArticlesFound:
            return 5;
        case ErrorCode::ProviderError:
            return 6;
        case ErrorCode::ReplayMiss:
            return 7;
        case ErrorCode::AllTrialsFailed:
            return 8;
        case ErrorCode::NoScores:
            return 9;
        case ErrorCode::ArtifactParseError:
            return 10;
        case ErrorCode::IoError:
        case ErrorCode::CorruptFile:
        case ErrorCode::VersionMismatch:
            return 11;
        default:
            return 1;
    }
}

}  // namespace sapphire::cli
