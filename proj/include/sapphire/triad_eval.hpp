/// @file triad_eval.hpp
/// @brief LLM-as-judge scoring of generated answers (groundedness, answer
///        relevance, context relevance) and aggregate report building.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sapphire/llm_gateway.hpp"
#include "sapphire/pipeline.hpp"
#include "sapphire/triad_types.hpp"

namespace sapphire::eval {

/// Judge-call knobs shared by the three metrics.
struct JudgeConfig {
    std::string model_id;
    double temperature = 0.0;
};

/// Fraction of the answer's statements the judge marks supported by the
/// context. Absent when any judge call fails or yields an unparseable
/// verdict (the whole metric is dropped rather than silently rescaled).
std::optional<double> judge_groundedness(const std::string& answer,
                                         const pipeline::RetrievedContext& context,
                                         llm::ChatProvider& judge, const JudgeConfig& config,
                                         const llm::PromptAssets& assets);

/// Single 0-10 judgement of answer-to-query pertinence, normalized to [0,1].
std::optional<double> judge_answer_relevance(const ConstructQuery& query,
                                             const std::string& answer,
                                             llm::ChatProvider& judge,
                                             const JudgeConfig& config,
                                             const llm::PromptAssets& assets);

/// Mean of per-chunk 0-10 judgements normalized to [0,1]; chunks whose
/// judgement fails are skipped; absent when no chunk was judged successfully.
std::optional<double> judge_context_relevance(const ConstructQuery& query,
                                              const pipeline::RetrievedContext& context,
                                              llm::ChatProvider& judge,
                                              const JudgeConfig& config,
                                              const llm::PromptAssets& assets);

/// All three metrics for one corrected answer.
TriadScores judge_all(const ConstructQuery& query, const std::string& answer,
                      const pipeline::RetrievedContext& context, llm::ChatProvider& judge,
                      const JudgeConfig& config, const llm::PromptAssets& assets);

/// Parses a yes/no judge verdict. nullopt when the reply is neither.
std::optional<bool> parse_yes_no(const std::string& reply);

/// Parses an integer 0-10 judge score. nullopt when no such integer leads
/// the reply.
std::optional<int> parse_zero_to_ten(const std::string& reply);

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMetricCount = 3;
extern const std::array<std::string_view, kMetricCount> kMetricNames;  // json keys
extern const std::array<std::string_view, kMetricCount> kMetricTitles;  // display

struct MetricCell {
    std::size_t n = 0;
    std::optional<double> mean;
};

/// Overall stats per metric plus per-construct means, mirroring the
/// evaluation tables: per-construct means with n, and overall n/mean/sd/CI.
struct Report {
    ConstructMap<std::array<MetricCell, kMetricCount>> per_construct;
    std::array<MetricCell, kMetricCount> overall;
    std::array<std::optional<RunStats>, kMetricCount> overall_stats;  // set when n >= 2
};

/// Builds the report over every trial's score map (trials from all systems
/// concatenated). Throws NoScores when no metric has a single present score.
Report build_report(const std::vector<ConstructMap<TriadScores>>& trial_scores);

nlohmann::ordered_json report_to_json(const Report& report);
std::string render_report_markdown(const Report& report);

}  // namespace sapphire::eval
