#include "sapphire/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <functional>
#include <limits>
#include <thread>
#include <unordered_map>

#include "sapphire/hash.hpp"
#include "sapphire/textio.hpp"
#include "sapphire/triad_eval.hpp"

namespace sapphire::pipeline {

namespace {

using json = nlohmann::ordered_json;

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::string artifact_stem(const SystemName& system) {
    std::string normalized = ingest::normalize_system_name(system.str());
    std::replace(normalized.begin(), normalized.end(), ' ', '_');
    return normalized;
}

/// Runs tasks 0..count-1 on at most `bound` threads; the first exception (by
/// task completion order) is rethrown after all workers join.
void parallel_for_bounded(std::size_t count, int bound,
                          const std::function<void(std::size_t)>& task) {
    if (count == 0) return;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(bound, 1)),
                                                count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

json index_meta_json(const PipelineConfig& config, const std::string& provider_id,
                     std::size_t chunk_count) {
    json meta;
    meta["provider_id"] = provider_id;
    meta["chunk_size"] = config.chunk_size;
    meta["chunk_overlap"] = config.chunk_overlap;
    meta["chunk_count"] = chunk_count;
    return meta;
}

}  // namespace

void PipelineConfig::validate() const {
    auto fail = [](const std::string& message) {
        throw Error(ErrorCode::InvalidConfig, message);
    };
    if (k_articles < 1) fail("k_articles must be at least 1");
    if (top_k < 1) fail("top_k must be at least 1");
    if (chunk_size < 1) fail("chunk_size must be positive");
    if (chunk_overlap >= chunk_size) fail("chunk_overlap must be smaller than chunk_size");
    if (trials < 1) fail("trials must be at least 1");
    if (temperature < 0.0) fail("temperature must be non-negative");
    if (parse_retries < 0) fail("parse_retries must be non-negative");
    if (http_attempts < 1) fail("http_attempts must be at least 1");
    if (concurrency < 1) fail("concurrency must be at least 1");
    if (hypothesis_model.empty() || correction_model.empty() || judge_model.empty()) {
        fail("model ids must be non-empty");
    }
}

std::vector<llm::ContextChunk> RetrievedContext::as_context_chunks() const {
    std::vector<llm::ContextChunk> out;
    out.reserve(chunks.size());
    for (const chunker::Chunk& chunk : chunks) {
        out.push_back({chunk.source_title, chunk.text});
    }
    return out;
}

std::pair<chunker::ChunkCorpus, vecstore::EmbeddedIndex> build_knowledge_index(
    const SystemName& system, const PipelineConfig& config, const ProviderSet& providers,
    const std::filesystem::path& cache_dir) {
    config.validate();

    ingest::SourceBundle bundle =
        ingest::fetch_articles(system, config.k_articles, *providers.source, cache_dir);

    chunker::ChunkCorpus corpus = chunker::split_text(
        bundle.merged_text, config.chunk_size, config.chunk_overlap,
        chunker::default_separators());
    chunker::assign_source_titles(corpus, bundle.article_spans());
    if (corpus.chunks.empty()) {
        throw Error(ErrorCode::NoArticlesFound,
                    "articles for \"" + system.str() + "\" contain no indexable text");
    }

    std::string normalized = ingest::normalize_system_name(system.str());
    std::filesystem::path index_path =
        cache_dir / "index" / (normalized + "__K" + std::to_string(config.k_articles) + ".idx");
    std::filesystem::path meta_path = index_path;
    meta_path += ".meta.json";

    std::string provider_id = providers.embedder->id();
    json wanted_meta = index_meta_json(config, provider_id, corpus.chunks.size());

    if (std::filesystem::exists(index_path) && std::filesystem::exists(meta_path)) {
        json stored_meta = json::parse(read_text_file(meta_path), nullptr,
                                       /*allow_exceptions=*/false);
        if (stored_meta == wanted_meta) {
            vecstore::EmbeddedIndex index = vecstore::load_index(index_path);
            if (index.provider_id == provider_id &&
                index.entries.size() == corpus.chunks.size()) {
                return {std::move(corpus), std::move(index)};
            }
        }
        // Parameters changed since the cache was written; fall through and rebuild.
    }

    std::vector<std::string> texts;
    texts.reserve(corpus.chunks.size());
    for (const chunker::Chunk& chunk : corpus.chunks) texts.push_back(chunk.text);
    std::vector<vecstore::EmbeddingVector> vectors =
        vecstore::embed_texts(texts, *providers.embedder);

    vecstore::EmbeddedIndex index;
    index.provider_id = provider_id;
    for (std::size_t i = 0; i < corpus.chunks.size(); ++i) {
        index.add(corpus.chunks[i].id, std::move(vectors[i]));
    }
    vecstore::save_index(index, index_path);
    write_text_file(meta_path, wanted_meta.dump(2) + "\n");
    return {std::move(corpus), std::move(index)};
}

HypotheticalModel generate_hypothetical_model(const SystemName& system,
                                              const PipelineConfig& config,
                                              llm::ChatProvider& chat,
                                              const llm::PromptAssets& assets) {
    std::string prompt = llm::render_tau(system, assets.definitions, assets.reasoning_steps,
                                         assets.format_instructions);
    int attempts = 1 + config.parse_retries;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        std::string raw = chat.complete({config.hypothesis_model, prompt, config.temperature});
        try {
            return llm::parse_hypothetical(raw, system);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ParseError) throw;
            last_error = e.what();
        }
    }
    throw Error(ErrorCode::TrialFailed,
                "hypothetical model unparseable after " + std::to_string(attempts) +
                    " attempts (" + last_error + ")");
}

TransformedQuery transform_query(const ConstructQuery& query,
                                 const std::string& hypothetical_answer) {
    if (is_blank(hypothetical_answer)) {
        throw Error(ErrorCode::EmptyHypothetical,
                    "no hypothetical answer for " + std::string(construct_name(query.kind)));
    }
    return {query.kind, query.text + " " + hypothetical_answer};
}

RetrievedContext retrieve_context(const TransformedQuery& tq,
                                  const vecstore::EmbeddedIndex& index,
                                  const chunker::ChunkCorpus& corpus, int top_k,
                                  vecstore::EmbeddingProvider& embedder) {
    if (index.provider_id != embedder.id()) {
        throw Error(ErrorCode::InvalidConfig,
                    "index was embedded with \"" + index.provider_id +
                        "\" but the current provider is \"" + embedder.id() +
                        "\"; rebuild the index or fix the config");
    }
    std::vector<vecstore::EmbeddingVector> vectors = embedder.embed_batch({tq.text});
    if (vectors.size() != 1) {
        throw Error(ErrorCode::ProviderError, "expected one query embedding, got " +
                                                  std::to_string(vectors.size()));
    }
    std::vector<vecstore::SearchHit> hits =
        vecstore::top_k(index, vectors.front(), static_cast<std::size_t>(top_k));

    std::unordered_map<std::int64_t, const chunker::Chunk*> by_id;
    for (const chunker::Chunk& chunk : corpus.chunks) by_id[chunk.id] = &chunk;

    RetrievedContext context;
    context.kind = tq.kind;
    for (const vecstore::SearchHit& hit : hits) {
        auto it = by_id.find(hit.chunk_id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::CorruptFile,
                        "index entry " + std::to_string(hit.chunk_id) + " has no chunk; "
                        "the cached index does not match the corpus");
        }
        context.chunks.push_back(*it->second);
        context.scores.push_back(hit.score);
    }
    return context;
}

std::string generate_corrected_answer(const SystemName& system, const ConstructQuery& query,
                                      const std::string& hypothetical_answer,
                                      const RetrievedContext& context,
                                      const PipelineConfig& config, llm::ChatProvider& chat,
                                      const llm::PromptAssets& assets) {
    if (context.chunks.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot correct against an empty context");
    }
    std::string context_str = llm::build_context_str(context.as_context_chunks());
    std::string prompt =
        llm::render_rho(system, query, hypothetical_answer, context_str, assets.definitions);
    std::string answer = chat.complete({config.correction_model, prompt, config.temperature});
    if (is_blank(answer)) {
        throw Error(ErrorCode::ProviderError, "correction model returned an empty answer for " +
                                                  std::string(construct_name(query.kind)));
    }
    return answer;
}

TrialRecord run_trial(const SystemName& system, const chunker::ChunkCorpus& corpus,
                      const vecstore::EmbeddedIndex& index, const PipelineConfig& config,
                      const ProviderSet& providers, const llm::PromptAssets& assets,
                      int trial_index) {
    struct ConstructResult {
        RetrievedContext context;
        std::string corrected;
        eval::TriadScores scores;
    };

    try {
        HypotheticalModel hypothetical =
            generate_hypothetical_model(system, config, *providers.chat, assets);

        auto queries = queries_for_all_constructs();
        std::array<std::optional<ConstructResult>, kConstructCount> results;
        eval::JudgeConfig judge_config{config.judge_model, config.temperature};

        parallel_for_bounded(
            queries.size(), config.sequential ? 1 : config.concurrency, [&](std::size_t i) {
                const ConstructQuery& query = queries[i];
                const std::string& hypothetical_answer = hypothetical.answers[query.kind];
                TransformedQuery tq = transform_query(query, hypothetical_answer);
                RetrievedContext context =
                    retrieve_context(tq, index, corpus, config.top_k, *providers.embedder);
                std::string corrected = generate_corrected_answer(
                    system, query, hypothetical_answer, context, config, *providers.chat,
                    assets);
                eval::TriadScores scores = eval::judge_all(query, corrected, context,
                                                           *providers.chat, judge_config, assets);
                results[i] = ConstructResult{std::move(context), std::move(corrected), scores};
            });

        TrialRecord record{trial_index, std::move(hypothetical), {}, SapphireModel{system, {}}, {}};
        for (std::size_t i = 0; i < queries.size(); ++i) {
            ConstructKind kind = queries[i].kind;
            ConstructResult& result = *results[i];
            record.contexts[kind] = std::move(result.context);
            record.corrected.answers[kind] = std::move(result.corrected);
            record.scores[kind] = result.scores;
        }
        record.corrected.validate();
        return record;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::TrialFailed) throw;
        if (e.code() == ErrorCode::ProviderError) {
            throw Error(ErrorCode::TrialFailed,
                        "trial " + std::to_string(trial_index) + ": " + e.what());
        }
        throw;  // config/fixture problems abort the whole run
    }
}

std::optional<double> mean_of_scores(const ConstructMap<eval::TriadScores>& score_map) {
    double sum = 0.0;
    std::size_t count = 0;
    for (ConstructKind kind : all_constructs()) {
        const eval::TriadScores& scores = score_map[kind];
        for (const std::optional<double>& value :
             {scores.groundedness, scores.answer_relevance, scores.context_relevance}) {
            if (value.has_value()) {
                sum += *value;
                ++count;
            }
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::optional<double> trial_mean_score(const TrialRecord& trial) {
    return mean_of_scores(trial.scores);
}

std::size_t select_best_trial(const std::vector<TrialRecord>& trials) {
    if (trials.empty()) {
        throw Error(ErrorCode::AllTrialsFailed, "no trial completed");
    }
    std::size_t best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    int best_index = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < trials.size(); ++i) {
        double mean =
            trial_mean_score(trials[i]).value_or(-std::numeric_limits<double>::infinity());
        if (mean > best_mean || (mean == best_mean && trials[i].trial_index < best_index)) {
            best = i;
            best_mean = mean;
            best_index = trials[i].trial_index;
        }
    }
    return best;
}

namespace {

json scores_to_json(const eval::TriadScores& scores) {
    auto value_or_null = [](const std::optional<double>& v) {
        return v.has_value() ? json(*v) : json(nullptr);
    };
    json j;
    j["groundedness"] = value_or_null(scores.groundedness);
    j["answer_relevance"] = value_or_null(scores.answer_relevance);
    j["context_relevance"] = value_or_null(scores.context_relevance);
    return j;
}

json trial_to_json(const TrialRecord& trial) {
    json j;
    j["trial_index"] = trial.trial_index;

    json hypothetical;
    for (ConstructKind kind : all_constructs()) {
        hypothetical[std::string(construct_answer_key(kind))] = trial.hypothetical.answers[kind];
    }
    j["hypothetical"] = std::move(hypothetical);

    json contexts;
    for (ConstructKind kind : all_constructs()) {
        json list = json::array();
        const RetrievedContext& context = trial.contexts[kind];
        for (std::size_t i = 0; i < context.chunks.size(); ++i) {
            list.push_back({{"chunk_id", context.chunks[i].id},
                            {"score", context.scores[i]},
                            {"source_title", context.chunks[i].source_title},
                            {"text", context.chunks[i].text}});
        }
        contexts[std::string(construct_name(kind))] = std::move(list);
    }
    j["contexts"] = std::move(contexts);

    j["corrected"] = trial.corrected.to_json();

    json scores;
    for (ConstructKind kind : all_constructs()) {
        scores[std::string(construct_name(kind))] = scores_to_json(trial.scores[kind]);
    }
    j["scores"] = std::move(scores);
    return j;
}

}  // namespace

GenerateOutcome run_generate(const SystemName& system, const PipelineConfig& config,
                             const ProviderSet& providers, const llm::PromptAssets& assets,
                             const std::filesystem::path& cache_dir,
                             const std::filesystem::path& out_dir,
                             bool deterministic_artifact_name) {
    config.validate();
    auto [corpus, index] = build_knowledge_index(system, config, providers, cache_dir);

    GenerateOutcome outcome;
    for (int t = 0; t < config.trials; ++t) {
        try {
            outcome.trials.push_back(
                run_trial(system, corpus, index, config, providers, assets, t));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TrialFailed) throw;
            outcome.failed_trials.push_back(t);
        }
    }
    if (outcome.trials.empty()) {
        throw Error(ErrorCode::AllTrialsFailed,
                    "all " + std::to_string(config.trials) + " trials failed");
    }
    outcome.selected = select_best_trial(outcome.trials);
    const TrialRecord& best = outcome.trials[outcome.selected];

    json artifact;
    artifact["system"] = system.str();
    artifact["config"] = {{"k_articles", config.k_articles},
                          {"top_k", config.top_k},
                          {"chunk_size", config.chunk_size},
                          {"chunk_overlap", config.chunk_overlap},
                          {"trials", config.trials},
                          {"temperature", config.temperature},
                          {"hypothesis_model", config.hypothesis_model},
                          {"correction_model", config.correction_model},
                          {"judge_model", config.judge_model},
                          {"embedding_provider", providers.embedder->id()}};
    artifact["trials"] = json::array();
    for (const TrialRecord& trial : outcome.trials) {
        artifact["trials"].push_back(trial_to_json(trial));
    }
    artifact["failed_trials"] = outcome.failed_trials;
    artifact["selected_trial_index"] = best.trial_index;
    artifact["model"] = best.corrected.to_json();

    std::string stem = artifact_stem(system);
    std::string filename = deterministic_artifact_name
                               ? "run_" + stem + "_replay.json"
                               : "run_" + stem + "_" + utc_timestamp() + ".json";
    outcome.artifact_path = out_dir / filename;
    write_text_file(outcome.artifact_path, artifact.dump(2) + "\n");
    outcome.artifact = std::move(artifact);
    return outcome;
}

nlohmann::ordered_json load_artifact(const std::filesystem::path& path) {
    std::string raw = read_text_file(path);
    json artifact = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (artifact.is_discarded() || !artifact.is_object() || !artifact.contains("trials") ||
        !artifact["trials"].is_array()) {
        throw Error(ErrorCode::ArtifactParseError,
                    "not a run artifact: " + path.string());
    }
    return artifact;
}

std::vector<ArtifactTrialView> parse_artifact_trials(const nlohmann::json& artifact) {
    try {
        std::vector<ArtifactTrialView> views;
        for (const auto& trial : artifact.at("trials")) {
            ArtifactTrialView view;
            view.trial_index = trial.at("trial_index").get<int>();

            SapphireModel corrected = SapphireModel::from_json(trial.at("corrected"));
            view.corrected = corrected.answers;

            for (ConstructKind kind : all_constructs()) {
                std::string key(construct_name(kind));

                RetrievedContext context;
                context.kind = kind;
                for (const auto& item : trial.at("contexts").at(key)) {
                    chunker::Chunk chunk;
                    chunk.id = item.at("chunk_id").get<std::int64_t>();
                    chunk.text = item.at("text").get<std::string>();
                    chunk.source_title = item.at("source_title").get<std::string>();
                    context.chunks.push_back(std::move(chunk));
                    context.scores.push_back(item.at("score").get<double>());
                }
                view.contexts[kind] = std::move(context);

                const auto& scores = trial.at("scores").at(key);
                auto read_metric = [&](const char* name) -> std::optional<double> {
                    if (!scores.contains(name) || scores.at(name).is_null()) return std::nullopt;
                    return scores.at(name).get<double>();
                };
                view.scores[kind] = {read_metric("groundedness"), read_metric("answer_relevance"),
                                     read_metric("context_relevance")};
            }
            views.push_back(std::move(view));
        }
        return views;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ArtifactParseError,
                    std::string("malformed run artifact: ") + e.what());
    }
}

}  // namespace sapphire::pipeline
