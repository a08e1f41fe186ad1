#include "sapphire/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>

#include "http_util.hpp"
#include "sapphire/textio.hpp"
#include "sapphire/utf8.hpp"

namespace sapphire::ingest {

namespace {

using json = nlohmann::json;

std::string utc_now_iso8601() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct SemaphoreGuard {
    std::counting_semaphore<8>& sem;
    explicit SemaphoreGuard(std::counting_semaphore<8>& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
};

std::filesystem::path cache_file(const std::filesystem::path& cache_dir,
                                 const std::string& normalized, int k) {
    return cache_dir / "sources" / (normalized + "__K" + std::to_string(k) + ".json");
}

}  // namespace

std::string normalize_system_name(const std::string& name) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : name) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (out.empty()) {
        throw Error(ErrorCode::EmptyName, "system name is empty after normalization");
    }
    return out;
}

std::string merge_bodies(const std::vector<SourceArticle>& articles) {
    std::string merged;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        if (i > 0) merged += "\n\n";
        merged += articles[i].body;
    }
    return merged;
}

std::vector<chunker::SourceSpan> SourceBundle::article_spans() const {
    std::vector<chunker::SourceSpan> spans;
    spans.reserve(articles.size());
    std::size_t offset = 0;
    for (const SourceArticle& article : articles) {
        std::size_t len = utf8::length(article.body);
        spans.push_back({article.title, {offset, offset + len}});
        offset += len + 2;  // the "\n\n" joiner
    }
    return spans;
}

nlohmann::ordered_json SourceBundle::to_json() const {
    nlohmann::ordered_json j;
    j["system"] = system.str();
    j["k"] = k_articles;
    j["articles"] = nlohmann::ordered_json::array();
    for (const SourceArticle& article : articles) {
        j["articles"].push_back({{"title", article.title},
                                 {"url", article.url},
                                 {"body", article.body},
                                 {"fetched_at", article.fetched_at}});
    }
    return j;
}

SourceBundle SourceBundle::from_json(const nlohmann::json& j) {
    SourceBundle bundle{SystemName::parse(j.at("system").get<std::string>()),
                        j.at("k").get<int>(),
                        {},
                        {}};
    for (const auto& item : j.at("articles")) {
        bundle.articles.push_back({item.at("title").get<std::string>(),
                                   item.at("url").get<std::string>(),
                                   item.at("body").get<std::string>(),
                                   item.at("fetched_at").get<std::string>()});
    }
    bundle.merged_text = merge_bodies(bundle.articles);
    return bundle;
}

SourceBundle fetch_articles(const SystemName& system, int k_articles,
                            KnowledgeSourceClient& source,
                            const std::filesystem::path& cache_dir) {
    if (k_articles < 1) {
        throw Error(ErrorCode::InvalidArgument, "k_articles must be at least 1");
    }
    std::string normalized = normalize_system_name(system.str());
    std::filesystem::path path = cache_file(cache_dir, normalized, k_articles);

    if (std::filesystem::exists(path)) {
        try {
            return SourceBundle::from_json(json::parse(read_text_file(path)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::CorruptFile,
                        "bad source cache " + path.string() + ": " + e.what());
        }
    }

    std::vector<SourceArticle> articles = source.fetch(system, k_articles);
    if (articles.empty()) {
        throw Error(ErrorCode::NoArticlesFound,
                    "knowledge source has no articles for \"" + system.str() + "\"");
    }
    if (articles.size() > static_cast<std::size_t>(k_articles)) {
        articles.resize(static_cast<std::size_t>(k_articles));
    }

    SourceBundle bundle{system, k_articles, std::move(articles), {}};
    bundle.merged_text = merge_bodies(bundle.articles);
    write_text_file(path, bundle.to_json().dump(2) + "\n");
    return bundle;
}

// ---------------------------------------------------------------------------
// MediaWiki-style HTTP client
// ---------------------------------------------------------------------------

WikiHttpClient::WikiHttpClient(std::string api_url, int max_attempts)
    : api_url_(std::move(api_url)), max_attempts_(max_attempts) {}

std::vector<SourceArticle> WikiHttpClient::fetch(const SystemName& system, int k) {
    std::string search_query = "?action=query&list=search&format=json&srlimit=" +
                               std::to_string(k) +
                               "&srsearch=" + netutil::url_encode(system.str());
    std::string raw;
    {
        SemaphoreGuard guard(inflight_);
        raw = netutil::get_with_retry(api_url_, search_query, max_attempts_,
                                      ErrorCode::SourceUnavailable);
    }

    std::vector<std::string> titles;
    try {
        json parsed = json::parse(raw);
        for (const auto& hit : parsed.at("query").at("search")) {
            titles.push_back(hit.at("title").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SourceUnavailable,
                    std::string("malformed search response: ") + e.what());
    }

    std::vector<SourceArticle> articles;
    for (const std::string& title : titles) {
        std::string extract_query =
            "?action=query&prop=extracts%7Cinfo&inprop=url&explaintext=1&redirects=1&format="
            "json&titles=" +
            netutil::url_encode(title);
        std::string body_raw;
        {
            SemaphoreGuard guard(inflight_);
            body_raw = netutil::get_with_retry(api_url_, extract_query, max_attempts_,
                                               ErrorCode::SourceUnavailable);
        }
        try {
            json parsed = json::parse(body_raw);
            for (const auto& [page_id, page] : parsed.at("query").at("pages").items()) {
                if (!page.contains("extract")) continue;
                std::string body = page["extract"].get<std::string>();
                if (body.empty()) continue;
                std::string url = page.value("fullurl", "");
                articles.push_back({page.value("title", title), url, std::move(body),
                                    utc_now_iso8601()});
                break;
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SourceUnavailable,
                        std::string("malformed extract response: ") + e.what());
        }
    }
    return articles;
}

// ---------------------------------------------------------------------------
// Fixture source
// ---------------------------------------------------------------------------

FixtureKnowledgeSource::FixtureKnowledgeSource(std::filesystem::path dir)
    : dir_(std::move(dir)) {}

std::vector<SourceArticle> FixtureKnowledgeSource::fetch(const SystemName& system, int k) {
    std::string normalized = normalize_system_name(system.str());
    std::filesystem::path sources_dir = dir_ / "sources";
    std::filesystem::path exact = cache_file(dir_, normalized, k);

    std::filesystem::path chosen;
    if (std::filesystem::exists(exact)) {
        chosen = exact;
    } else if (std::filesystem::is_directory(sources_dir)) {
        // Any recording for this system will do; trim to k below.
        std::string prefix = normalized + "__K";
        for (const auto& entry : std::filesystem::directory_iterator(sources_dir)) {
            std::string name = entry.path().filename().string();
            if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".json") {
                chosen = entry.path();
                break;
            }
        }
    }
    if (chosen.empty()) return {};

    try {
        SourceBundle bundle = SourceBundle::from_json(json::parse(read_text_file(chosen)));
        std::vector<SourceArticle> articles = std::move(bundle.articles);
        if (articles.size() > static_cast<std::size_t>(k)) {
            articles.resize(static_cast<std::size_t>(k));
        }
        return articles;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptFile, "bad fixture " + chosen.string() + ": " + e.what());
    }
}

}  // namespace sapphire::ingest
