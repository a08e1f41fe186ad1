/// @file pipeline.hpp
/// @brief Orchestrates the four-stage workflow: knowledge-source indexing,
///        hypothetical-model generation, retrieval with transformed queries,
///        and per-construct corrected generation — over repeated trials.
#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sapphire/chunker.hpp"
#include "sapphire/core.hpp"
#include "sapphire/ingest.hpp"
#include "sapphire/llm_gateway.hpp"
#include "sapphire/triad_types.hpp"
#include "sapphire/vecstore.hpp"

namespace sapphire::pipeline {

struct PipelineConfig {
    int k_articles = 3;
    int top_k = 5;
    std::size_t chunk_size = 1024;
    std::size_t chunk_overlap = 256;
    int trials = 10;
    double temperature = 0.0;

    std::string hypothesis_model = "gpt-4o";
    std::string correction_model = "gpt-3.5-turbo-0125";
    std::string judge_model = "gpt-3.5-turbo";

    int parse_retries = 2;  // extra generation attempts when parsing fails
    int http_attempts = 3;
    int concurrency = 4;  // bound on concurrent per-construct work in a trial
    bool sequential = false;  // force sequential constructs (set under replay)

    /// Throws InvalidConfig on out-of-range values.
    void validate() const;
};

/// Query text extended with the trial's hypothetical answer (the embedded
/// form used for document-to-document retrieval).
struct TransformedQuery {
    ConstructKind kind;
    std::string text;
};

/// The retrieval result for one construct query.
struct RetrievedContext {
    ConstructKind kind = ConstructKind::StateChange;
    std::vector<chunker::Chunk> chunks;  // score-descending, at most top_k
    std::vector<double> scores;          // parallel to chunks

    std::vector<llm::ContextChunk> as_context_chunks() const;
};

/// Everything one trial produced.
struct TrialRecord {
    int trial_index = 0;
    HypotheticalModel hypothetical;
    ConstructMap<RetrievedContext> contexts;
    SapphireModel corrected;
    ConstructMap<eval::TriadScores> scores;
};

/// The provider bundle a run needs. One chat provider serves the hypothesis,
/// correction, and judge roles (distinguished by model id in the request).
struct ProviderSet {
    std::shared_ptr<ingest::KnowledgeSourceClient> source;
    std::shared_ptr<vecstore::EmbeddingProvider> embedder;
    std::shared_ptr<llm::ChatProvider> chat;
};

/// Fetch -> split -> embed -> index, all cached under cache_dir. A warm cache
/// performs zero provider calls. Returns the chunk corpus and the index.
std::pair<chunker::ChunkCorpus, vecstore::EmbeddedIndex> build_knowledge_index(
    const SystemName& system, const PipelineConfig& config, const ProviderSet& providers,
    const std::filesystem::path& cache_dir);

/// One chat call yields all seven hypothetical answers; malformed output is
/// regenerated up to config.parse_retries extra times, then TrialFailed.
HypotheticalModel generate_hypothetical_model(const SystemName& system,
                                              const PipelineConfig& config,
                                              llm::ChatProvider& chat,
                                              const llm::PromptAssets& assets);

/// query.text + " " + hypothetical_answer. Throws EmptyHypothetical.
TransformedQuery transform_query(const ConstructQuery& query,
                                 const std::string& hypothetical_answer);

/// Embeds tq.text and runs exact top-k. Throws InvalidConfig when the index
/// was built with a different embedding provider.
RetrievedContext retrieve_context(const TransformedQuery& tq,
                                  const vecstore::EmbeddedIndex& index,
                                  const chunker::ChunkCorpus& corpus, int top_k,
                                  vecstore::EmbeddingProvider& embedder);

/// Renders the correction prompt over the retrieved context and returns the
/// corrected answer verbatim. Throws InvalidArgument on empty context.
std::string generate_corrected_answer(const SystemName& system, const ConstructQuery& query,
                                      const std::string& hypothetical_answer,
                                      const RetrievedContext& context,
                                      const PipelineConfig& config, llm::ChatProvider& chat,
                                      const llm::PromptAssets& assets);

/// One full trial: hypothetical model, then per construct transform ->
/// retrieve -> correct -> judge. Judge failures leave scores absent; any
/// other failure throws TrialFailed.
TrialRecord run_trial(const SystemName& system, const chunker::ChunkCorpus& corpus,
                      const vecstore::EmbeddedIndex& index, const PipelineConfig& config,
                      const ProviderSet& providers, const llm::PromptAssets& assets,
                      int trial_index);

/// Mean over the trial's present scores (3 metrics x 7 constructs, absent
/// cells skipped); nullopt when nothing was scored.
std::optional<double> trial_mean_score(const TrialRecord& trial);

/// Position (into `trials`) of the trial with the highest mean score; ties
/// and all-unscored trials resolve to the lowest trial_index. Throws
/// AllTrialsFailed when `trials` is empty.
std::size_t select_best_trial(const std::vector<TrialRecord>& trials);

struct GenerateOutcome {
    std::vector<TrialRecord> trials;  // successful trials, in trial order
    std::vector<int> failed_trials;   // trial indices that raised TrialFailed
    std::size_t selected = 0;         // position in `trials`
    nlohmann::ordered_json artifact;
    std::filesystem::path artifact_path;
};

/// Runs config.trials trials end to end, selects the best one, and writes the
/// run artifact. With deterministic_artifact_name the file is named
/// run_<normalized>_replay.json instead of carrying a timestamp.
GenerateOutcome run_generate(const SystemName& system, const PipelineConfig& config,
                             const ProviderSet& providers, const llm::PromptAssets& assets,
                             const std::filesystem::path& cache_dir,
                             const std::filesystem::path& out_dir,
                             bool deterministic_artifact_name);

/// Reads and shape-checks a run artifact. Throws ArtifactParseError with the
/// file name on bad input, IoError when unreadable.
nlohmann::ordered_json load_artifact(const std::filesystem::path& path);

/// The artifact fields re-scoring and reporting need, per trial.
struct ArtifactTrialView {
    int trial_index = 0;
    ConstructMap<std::string> corrected;
    ConstructMap<RetrievedContext> contexts;
    ConstructMap<eval::TriadScores> scores;
};

/// Throws ArtifactParseError when the artifact's trials are malformed.
std::vector<ArtifactTrialView> parse_artifact_trials(const nlohmann::json& artifact);

/// Mean over the present scores of one score map; nullopt when none present.
std::optional<double> mean_of_scores(const ConstructMap<eval::TriadScores>& scores);

}  // namespace sapphire::pipeline
