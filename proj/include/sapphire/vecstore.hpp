/// @file vecstore.hpp
/// @brief Embedding-provider abstraction and an exact in-process vector index
///        with cosine top-k retrieval and binary persistence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sapphire/errors.hpp"

namespace sapphire::vecstore {

/// Fixed-length list of 64-bit floats. All vectors in one index share a dim.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

struct IndexEntry {
    std::int64_t chunk_id = 0;
    EmbeddingVector vector;
    double norm = 0.0;  // precomputed L2 norm

    bool operator==(const IndexEntry&) const = default;
};

/// Build-then-freeze vector index: single-writer construction via add(),
/// then immutable; concurrent reads are safe.
struct EmbeddedIndex {
    std::size_t dim = 0;
    std::string provider_id;
    std::vector<IndexEntry> entries;

    /// Appends one entry, computing its norm. Throws DimensionMismatch when
    /// the vector disagrees with the index dim (fixed by the first add),
    /// InvalidArgument on a duplicate chunk_id.
    void add(std::int64_t chunk_id, EmbeddingVector vector);

    bool operator==(const EmbeddedIndex&) const = default;
};

struct SearchHit {
    std::int64_t chunk_id = 0;
    double score = 0.0;
};

/// Interface to an embedding model. Implementations must be safe for
/// concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Stable identity of the embedding space (provider + model). Stored in
    /// the index; querying with a different id is an error upstream.
    virtual std::string id() const = 0;

    /// Embeds one batch; returns one vector per text, same order.
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

/// Embeds texts in batches of at most batch_size. Returns one vector per
/// input, same order, all with a consistent dimension.
/// Throws ProviderError (propagated), DimensionMismatch (inconsistent dims),
/// InvalidArgument (empty text or zero batch_size).
std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         EmbeddingProvider& provider,
                                         std::size_t batch_size = 64);

/// dot(u,v) / (|u|*|v|), clamped to [-1, 1] against rounding.
/// Throws DimensionMismatch, ZeroVector.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// The min(k, |index|) entries with highest cosine similarity to `query`,
/// descending score, ties broken by ascending chunk_id. Exact full scan.
/// Throws EmptyIndex, DimensionMismatch, InvalidArgument (k == 0).
std::vector<SearchHit> top_k(const EmbeddedIndex& index, const EmbeddingVector& query,
                             std::size_t k);

/// Versioned binary persistence (magic, version, dim, provider id, entries,
/// trailing checksum). load(save(x)) == x bit-exactly.
/// Throws IoError, VersionMismatch, CorruptFile.
void save_index(const EmbeddedIndex& index, const std::filesystem::path& path);
EmbeddedIndex load_index(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

/// Talks to an OpenAI-compatible /embeddings endpoint with retry/backoff.
class OpenAiEmbeddingClient : public EmbeddingProvider {
public:
    OpenAiEmbeddingClient(std::string base_url, std::string model, std::string api_key,
                          int max_attempts = 3);

    std::string id() const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    int max_attempts_;
};

/// Deterministic offline provider: signed feature hashing of lowercase
/// alphanumeric tokens, L2-normalized. No network, stable across runs.
class LocalHashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit LocalHashEmbeddingProvider(std::size_t dim = 256);

    std::string id() const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

    /// Embeds a single text (exposed for tests).
    EmbeddingVector embed_one(const std::string& text) const;

private:
    std::size_t dim_;
};

/// Serves embeddings recorded in `<fixture>` (JSON lines, one object per
/// embedded text). Throws ReplayMiss for texts never recorded.
class ReplayEmbeddingProvider : public EmbeddingProvider {
public:
    explicit ReplayEmbeddingProvider(const std::filesystem::path& fixture);

    std::string id() const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::string id_;
    std::unordered_map<std::string, EmbeddingVector> by_hash_;
};

/// Wraps a live provider and appends every embedded text to the fixture file
/// so a later run can replay it.
class RecordingEmbeddingProvider : public EmbeddingProvider {
public:
    RecordingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                               std::filesystem::path fixture);

    std::string id() const override;
    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::filesystem::path fixture_;
    std::mutex write_mutex_;
};

}  // namespace sapphire::vecstore
