/// @file triad_types.hpp
/// @brief Score containers, banding, and descriptive statistics for the
///        RAG-triad evaluation. Kept free of pipeline dependencies.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sapphire::eval {

/// One evaluated answer. An absent value means the judge call failed; absent
/// scores shrink the reported sample size instead of being padded.
struct TriadScores {
    std::optional<double> groundedness;
    std::optional<double> answer_relevance;
    std::optional<double> context_relevance;

    bool operator==(const TriadScores&) const = default;
};

enum class ScoreBand { Low, Medium, High };

/// Low: [0, 0.5)  Medium: [0.5, 0.8)  High: [0.8, 1].
/// Throws OutOfRange for scores outside [0, 1].
ScoreBand band(double score);

std::string_view band_name(ScoreBand band);

/// Descriptive statistics over one metric's present scores.
struct RunStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n-1 denominator)
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};

/// Mean, sample SD, and normal-approximation 95% CI (z = 1.96).
/// Throws InsufficientSamples for n < 2.
RunStats aggregate_stats(const std::vector<double>& samples);

/// Splits an answer into atomic statements for groundedness judging:
/// line breaks first (list items), then sentence enders (., !, ?) followed
/// by whitespace; leading bullet/number markers are stripped; pieces with no
/// alphanumeric content are dropped. A text that yields no pieces comes back
/// as a single statement.
std::vector<std::string> segment_statements(const std::string& answer);

}  // namespace sapphire::eval
