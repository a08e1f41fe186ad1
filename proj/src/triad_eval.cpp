#include "sapphire/triad_eval.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace sapphire::eval {

const std::array<std::string_view, kMetricCount> kMetricNames = {
    "groundedness", "answer_relevance", "context_relevance"};
const std::array<std::string_view, kMetricCount> kMetricTitles = {
    "Groundedness", "Answer relevance", "Context relevance"};

namespace {

std::string lower_trimmed(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    std::string out = s.substr(begin, end - begin + 1);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string ask(llm::ChatProvider& judge, const JudgeConfig& config, std::string prompt) {
    return judge.complete({config.model_id, std::move(prompt), config.temperature});
}

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string format_cell(const MetricCell& cell) {
    if (!cell.mean.has_value()) return "-";
    return two_decimals(*cell.mean) + " (" + std::to_string(cell.n) + ")";
}

}  // namespace

std::optional<bool> parse_yes_no(const std::string& reply) {
    std::string t = lower_trimmed(reply);
    auto is_word_at_start = [&](std::string_view word) {
        if (t.rfind(word, 0) != 0) return false;
        return t.size() == word.size() ||
               !std::isalpha(static_cast<unsigned char>(t[word.size()]));
    };
    if (is_word_at_start("yes")) return true;
    if (is_word_at_start("no")) return false;
    return std::nullopt;
}

std::optional<int> parse_zero_to_ten(const std::string& reply) {
    for (std::size_t i = 0; i < reply.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
        std::size_t end = i;
        int value = 0;
        while (end < reply.size() && std::isdigit(static_cast<unsigned char>(reply[end]))) {
            value = value * 10 + (reply[end] - '0');
            if (value > 10) return std::nullopt;
            ++end;
        }
        return value;
    }
    return std::nullopt;
}

std::optional<double> judge_groundedness(const std::string& answer,
                                         const pipeline::RetrievedContext& context,
                                         llm::ChatProvider& judge, const JudgeConfig& config,
                                         const llm::PromptAssets& assets) {
    if (answer.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot judge an empty answer");
    }
    std::string context_str = llm::build_context_str(context.as_context_chunks());
    std::vector<std::string> statements = segment_statements(answer);
    if (statements.empty()) return std::nullopt;

    std::size_t supported = 0;
    for (const std::string& statement : statements) {
        try {
            std::string prompt = llm::replace_placeholder(assets.judge_groundedness,
                                                          "{context_str}", context_str);
            prompt = llm::replace_placeholder(std::move(prompt), "{statement}", statement);
            std::optional<bool> verdict = parse_yes_no(ask(judge, config, std::move(prompt)));
            if (!verdict.has_value()) return std::nullopt;  // unusable judge output
            if (*verdict) ++supported;
        } catch (const std::exception&) {
            return std::nullopt;  // judge call failed; drop the whole metric
        }
    }
    return static_cast<double>(supported) / static_cast<double>(statements.size());
}

std::optional<double> judge_answer_relevance(const ConstructQuery& query,
                                             const std::string& answer,
                                             llm::ChatProvider& judge,
                                             const JudgeConfig& config,
                                             const llm::PromptAssets& assets) {
    if (answer.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot judge an empty answer");
    }
    try {
        std::string prompt =
            llm::replace_placeholder(assets.judge_answer_relevance, "{query}", query.text);
        prompt = llm::replace_placeholder(std::move(prompt), "{answer}", answer);
        std::optional<int> value = parse_zero_to_ten(ask(judge, config, std::move(prompt)));
        if (!value.has_value()) return std::nullopt;
        return static_cast<double>(*value) / 10.0;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<double> judge_context_relevance(const ConstructQuery& query,
                                              const pipeline::RetrievedContext& context,
                                              llm::ChatProvider& judge,
                                              const JudgeConfig& config,
                                              const llm::PromptAssets& assets) {
    if (context.chunks.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot judge an empty context");
    }
    double sum = 0.0;
    std::size_t judged = 0;
    for (const chunker::Chunk& chunk : context.chunks) {
        try {
            std::string prompt =
                llm::replace_placeholder(assets.judge_context_relevance, "{query}", query.text);
            prompt = llm::replace_placeholder(std::move(prompt), "{passage}", chunk.text);
            std::optional<int> value = parse_zero_to_ten(ask(judge, config, std::move(prompt)));
            if (!value.has_value()) continue;  // this chunk's judgement is unusable
            sum += static_cast<double>(*value) / 10.0;
            ++judged;
        } catch (const std::exception&) {
            continue;
        }
    }
    if (judged == 0) return std::nullopt;
    return sum / static_cast<double>(judged);
}

TriadScores judge_all(const ConstructQuery& query, const std::string& answer,
                      const pipeline::RetrievedContext& context, llm::ChatProvider& judge,
                      const JudgeConfig& config, const llm::PromptAssets& assets) {
    TriadScores scores;
    scores.groundedness = judge_groundedness(answer, context, judge, config, assets);
    scores.answer_relevance = judge_answer_relevance(query, answer, judge, config, assets);
    scores.context_relevance = judge_context_relevance(query, context, judge, config, assets);
    return scores;
}

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

namespace {

std::optional<double> metric_value(const TriadScores& scores, std::size_t metric) {
    switch (metric) {
        case 0: return scores.groundedness;
        case 1: return scores.answer_relevance;
        default: return scores.context_relevance;
    }
}

MetricCell cell_of(const std::vector<double>& samples) {
    MetricCell cell;
    cell.n = samples.size();
    if (!samples.empty()) {
        double sum = 0.0;
        for (double v : samples) sum += v;
        cell.mean = sum / static_cast<double>(samples.size());
    }
    return cell;
}

}  // namespace

Report build_report(const std::vector<ConstructMap<TriadScores>>& trial_scores) {
    ConstructMap<std::array<std::vector<double>, kMetricCount>> per_construct;
    std::array<std::vector<double>, kMetricCount> overall;

    for (const ConstructMap<TriadScores>& trial : trial_scores) {
        for (ConstructKind kind : all_constructs()) {
            for (std::size_t metric = 0; metric < kMetricCount; ++metric) {
                std::optional<double> value = metric_value(trial[kind], metric);
                if (!value.has_value()) continue;
                per_construct[kind][metric].push_back(*value);
                overall[metric].push_back(*value);
            }
        }
    }

    std::size_t total_present = 0;
    for (const auto& samples : overall) total_present += samples.size();
    if (total_present == 0) {
        throw Error(ErrorCode::NoScores, "no metric has a single present score");
    }

    Report report;
    for (ConstructKind kind : all_constructs()) {
        for (std::size_t metric = 0; metric < kMetricCount; ++metric) {
            report.per_construct[kind][metric] = cell_of(per_construct[kind][metric]);
        }
    }
    for (std::size_t metric = 0; metric < kMetricCount; ++metric) {
        report.overall[metric] = cell_of(overall[metric]);
        if (overall[metric].size() >= 2) {
            report.overall_stats[metric] = aggregate_stats(overall[metric]);
        }
    }
    return report;
}

nlohmann::ordered_json report_to_json(const Report& report) {
    nlohmann::ordered_json j;
    j["per_construct"] = nlohmann::ordered_json::object();
    for (ConstructKind kind : all_constructs()) {
        nlohmann::ordered_json construct = nlohmann::ordered_json::object();
        for (std::size_t metric = 0; metric < kMetricCount; ++metric) {
            const MetricCell& cell = report.per_construct[kind][metric];
            nlohmann::ordered_json entry;
            entry["mean"] = cell.mean.has_value() ? nlohmann::ordered_json(*cell.mean)
                                                  : nlohmann::ordered_json(nullptr);
            entry["n"] = cell.n;
            construct[std::string(kMetricNames[metric])] = std::move(entry);
        }
        j["per_construct"][std::string(construct_name(kind))] = std::move(construct);
    }

    j["overall"] = nlohmann::ordered_json::object();
    for (std::size_t metric = 0; metric < kMetricCount; ++metric) {
        const MetricCell& cell = report.overall[metric];
        nlohmann::ordered_json entry;
        entry["n"] = cell.n;
        entry["mean"] = cell.mean.has_value() ? nlohmann::ordered_json(*cell.mean)
                                              : nlohmann::ordered_json(nullptr);
        if (report.overall_stats[metric].has_value()) {
            const RunStats& stats = *report.overall_stats[metric];
            entry["sd"] = stats.sd;
            entry["ci95"] = {stats.ci95_low, stats.ci95_high};
        } else {
            entry["sd"] = nullptr;
            entry["ci95"] = nullptr;
        }
        j["overall"][std::string(kMetricNames[metric])] = std::move(entry);
    }
    return j;
}

std::string render_report_markdown(const Report& report) {
    std::string md;
    md += "## Overall quality scores\n\n";
    md += "| Statistic |";
    for (std::string_view title : kMetricTitles) md += " " + std::string(title) + " |";
    md += "\n|---|---|---|---|\n";

    md += "| Sample size (n) |";
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        md += " " + std::to_string(report.overall[m].n) + " |";
    }
    md += "\n| Mean |";
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        md += report.overall[m].mean.has_value() ? " " + two_decimals(*report.overall[m].mean) + " |"
                                                 : " - |";
    }
    md += "\n| Standard deviation |";
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        md += report.overall_stats[m].has_value()
                  ? " " + two_decimals(report.overall_stats[m]->sd) + " |"
                  : " - |";
    }
    md += "\n| 95% confidence interval |";
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        if (report.overall_stats[m].has_value()) {
            md += " [" + two_decimals(report.overall_stats[m]->ci95_low) + ", " +
                  two_decimals(report.overall_stats[m]->ci95_high) + "] |";
        } else {
            md += " - |";
        }
    }
    md += "\n\n## Scores by construct\n\n";
    md += "| Construct |";
    for (std::string_view title : kMetricTitles) md += " " + std::string(title) + " (n) |";
    md += "\n|---|---|---|---|\n";
    for (ConstructKind kind : all_constructs()) {
        md += "| " + std::string(construct_display_name(kind)) + " |";
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            md += " " + format_cell(report.per_construct[kind][m]) + " |";
        }
        md += "\n";
    }
    return md;
}

}  // namespace sapphire::eval
