#include "sapphire/triad_types.hpp"

#include <cctype>
#include <cmath>

#include "sapphire/errors.hpp"

namespace sapphire::eval {

ScoreBand band(double score) {
    if (!(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorCode::OutOfRange, "score " + std::to_string(score) + " not in [0, 1]");
    }
    if (score < 0.5) return ScoreBand::Low;
    if (score < 0.8) return ScoreBand::Medium;
    return ScoreBand::High;
}

std::string_view band_name(ScoreBand band) {
    switch (band) {
        case ScoreBand::Low: return "Low";
        case ScoreBand::Medium: return "Medium";
        case ScoreBand::High: return "High";
    }
    return "Low";
}

RunStats aggregate_stats(const std::vector<double>& samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::InsufficientSamples,
                    "need at least 2 samples, got " + std::to_string(samples.size()));
    }
    // Welford's online algorithm keeps the variance numerically stable.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (double x : samples) {
        ++count;
        double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    RunStats stats;
    stats.n = count;
    stats.mean = mean;
    stats.sd = std::sqrt(m2 / static_cast<double>(count - 1));
    double half_width = 1.96 * stats.sd / std::sqrt(static_cast<double>(count));
    stats.ci95_low = mean - half_width;
    stats.ci95_high = mean + half_width;
    return stats;
}

namespace {

bool has_content(const std::string& piece) {
    for (unsigned char c : piece) {
        if (std::isalnum(c) || c >= 0x80) return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

/// Strips one leading bullet or enumeration marker ("- ", "* ", "3. ", "2) ").
std::string strip_list_marker(const std::string& line) {
    std::size_t i = 0;
    // Unicode bullets arrive as multi-byte sequences; match the common ones.
    static const char* kBullets[] = {"-", "*", "•", "–", "—"};
    for (const char* bullet : kBullets) {
        std::size_t len = std::char_traits<char>::length(bullet);
        if (line.compare(0, len, bullet) == 0 && line.size() > len && line[len] == ' ') {
            return line.substr(len + 1);
        }
    }
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        std::size_t after = i + 1;
        if (after < line.size() && line[after] == ' ') return line.substr(after + 1);
    }
    return line;
}

}  // namespace

std::vector<std::string> segment_statements(const std::string& answer) {
    std::vector<std::string> statements;

    std::size_t line_start = 0;
    while (line_start <= answer.size()) {
        std::size_t line_end = answer.find('\n', line_start);
        std::string line = answer.substr(
            line_start, line_end == std::string::npos ? std::string::npos : line_end - line_start);
        line = strip_list_marker(trim(line));

        // Sentence enders followed by whitespace (or end of line) close a
        // statement; the ender run stays attached.
        std::size_t piece_start = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] != '.' && line[i] != '!' && line[i] != '?') continue;
            std::size_t ender_end = i;
            while (ender_end < line.size() &&
                   (line[ender_end] == '.' || line[ender_end] == '!' || line[ender_end] == '?')) {
                ++ender_end;
            }
            if (ender_end == line.size() ||
                std::isspace(static_cast<unsigned char>(line[ender_end]))) {
                std::string piece = trim(line.substr(piece_start, ender_end - piece_start));
                if (has_content(piece)) statements.push_back(std::move(piece));
                piece_start = ender_end;
            }
            i = ender_end - 1;
        }
        std::string tail = trim(line.substr(piece_start));
        if (has_content(tail)) statements.push_back(std::move(tail));

        if (line_end == std::string::npos) break;
        line_start = line_end + 1;
    }

    if (statements.empty()) {
        std::string whole = trim(answer);
        if (!whole.empty()) statements.push_back(std::move(whole));
    }
    return statements;
}

}  // namespace sapphire::eval
