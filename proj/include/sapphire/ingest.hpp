/// @file ingest.hpp
/// @brief Fetches top-K encyclopedia articles for a system, merges them into
///        one plain-text document, and caches the result on disk.
#pragma once

#include <filesystem>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sapphire/chunker.hpp"
#include "sapphire/core.hpp"

namespace sapphire::ingest {

struct SourceArticle {
    std::string title;
    std::string url;
    std::string body;  // plain text, non-empty
    std::string fetched_at;

    bool operator==(const SourceArticle&) const = default;
};

/// The merged knowledge source for one system.
struct SourceBundle {
    SystemName system;
    int k_articles = 0;
    std::vector<SourceArticle> articles;  // 1..k_articles, search-ranked
    std::string merged_text;              // bodies joined by "\n\n"

    /// Code-point span of each article body inside merged_text, for carrying
    /// source titles onto chunks.
    std::vector<chunker::SourceSpan> article_spans() const;

    nlohmann::ordered_json to_json() const;
    static SourceBundle from_json(const nlohmann::json& j);
};

/// Lowercased, whitespace-collapsed, trimmed cache key. Throws EmptyName.
std::string normalize_system_name(const std::string& name);

/// Builds merged_text from article bodies ("\n\n" joiner).
std::string merge_bodies(const std::vector<SourceArticle>& articles);

class KnowledgeSourceClient {
public:
    virtual ~KnowledgeSourceClient() = default;

    /// Up to k articles ranked by the source's search relevance. An empty
    /// result means the search found nothing (mapped to NoArticlesFound by
    /// fetch_articles). Throws SourceUnavailable on network failure.
    virtual std::vector<SourceArticle> fetch(const SystemName& system, int k) = 0;
};

/// Fetches from the cache when possible, otherwise from `source`, then writes
/// the cache file `<cache_dir>/sources/<normalized>__K<k>.json`.
/// Throws NoArticlesFound, SourceUnavailable, CorruptFile (bad cache JSON).
SourceBundle fetch_articles(const SystemName& system, int k_articles,
                            KnowledgeSourceClient& source,
                            const std::filesystem::path& cache_dir);

/// MediaWiki-style client: full-text search endpoint for ranking, extract
/// endpoint for plain-text bodies. Safe for concurrent calls; requests are
/// bounded by a small per-client semaphore.
class WikiHttpClient : public KnowledgeSourceClient {
public:
    explicit WikiHttpClient(std::string api_url, int max_attempts = 3);

    std::vector<SourceArticle> fetch(const SystemName& system, int k) override;

private:
    std::string api_url_;
    int max_attempts_;
    std::counting_semaphore<8> inflight_{2};
};

/// Serves bundles from recorded cache files under `<dir>/sources/`. Used for
/// offline runs; accepts a file recorded with a different K and trims it.
class FixtureKnowledgeSource : public KnowledgeSourceClient {
public:
    explicit FixtureKnowledgeSource(std::filesystem::path dir);

    std::vector<SourceArticle> fetch(const SystemName& system, int k) override;

private:
    std::filesystem::path dir_;
};

}  // namespace sapphire::ingest
