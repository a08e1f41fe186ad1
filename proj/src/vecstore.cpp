#include "sapphire/vecstore.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "http_util.hpp"
#include "sapphire/hash.hpp"

namespace sapphire::vecstore {

namespace {

using json = nlohmann::json;

double l2_norm(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double clamp_unit(double x) { return std::min(1.0, std::max(-1.0, x)); }

// --- binary index format -----------------------------------------------------
// magic "SAPPHIDX" | u32 version | u32 dim | u32 id_len | id bytes
// | u64 entry_count | per entry: i64 chunk_id, f64 norm, dim * f64 values
// | u64 FNV-1a checksum of everything before it. All integers little-endian.

constexpr char kMagic[8] = {'S', 'A', 'P', 'P', 'H', 'I', 'D', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Cursor {
    const std::string& data;
    std::size_t pos = 0;

    void require(std::size_t n) const {
        if (pos + n > data.size()) {
            throw Error(ErrorCode::CorruptFile, "index file truncated");
        }
    }
    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::size_t n) {
        require(n);
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void EmbeddedIndex::add(std::int64_t chunk_id, EmbeddingVector vector) {
    if (vector.dim() == 0) {
        throw Error(ErrorCode::InvalidArgument, "cannot index an empty vector");
    }
    if (entries.empty() && dim == 0) dim = vector.dim();
    if (vector.dim() != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "vector dim " + std::to_string(vector.dim()) + " != index dim " +
                        std::to_string(dim));
    }
    for (double v : vector.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "vector contains a non-finite value");
        }
    }
    if (std::any_of(entries.begin(), entries.end(),
                    [&](const IndexEntry& e) { return e.chunk_id == chunk_id; })) {
        throw Error(ErrorCode::InvalidArgument,
                    "duplicate chunk_id " + std::to_string(chunk_id));
    }
    double norm = l2_norm(vector.values);
    if (norm == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cannot index a zero vector");
    }
    entries.push_back({chunk_id, std::move(vector), norm});
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         EmbeddingProvider& provider, std::size_t batch_size) {
    if (batch_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
    }
    for (const std::string& t : texts) {
        if (t.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed an empty text");
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, texts.size());
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                       texts.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<EmbeddingVector> vectors = provider.embed_batch(batch);
        if (vectors.size() != batch.size()) {
            throw Error(ErrorCode::ProviderError,
                        "embedding provider returned " + std::to_string(vectors.size()) +
                            " vectors for " + std::to_string(batch.size()) + " texts");
        }
        for (EmbeddingVector& v : vectors) out.push_back(std::move(v));
    }
    for (const EmbeddingVector& v : out) {
        if (v.dim() != out.front().dim()) {
            throw Error(ErrorCode::DimensionMismatch,
                        "embedding provider returned inconsistent dimensions");
        }
    }
    return out;
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine_similarity dims " + std::to_string(u.dim()) + " and " +
                        std::to_string(v.dim()));
    }
    double norm_u = l2_norm(u.values);
    double norm_v = l2_norm(v.values);
    if (norm_u == 0.0 || norm_v == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector is undefined");
    }
    return clamp_unit(dot(u.values, v.values) / (norm_u * norm_v));
}

std::vector<SearchHit> top_k(const EmbeddedIndex& index, const EmbeddingVector& query,
                             std::size_t k) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
    if (index.entries.empty()) throw Error(ErrorCode::EmptyIndex, "index has no entries");
    if (query.dim() != index.dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dim " + std::to_string(query.dim()) + " != index dim " +
                        std::to_string(index.dim));
    }
    double query_norm = l2_norm(query.values);
    if (query_norm == 0.0) {
        throw Error(ErrorCode::ZeroVector, "query embedding is a zero vector");
    }

    std::vector<SearchHit> hits;
    hits.reserve(index.entries.size());
    for (const IndexEntry& entry : index.entries) {
        double score = clamp_unit(dot(query.values, entry.vector.values) /
                                  (query_norm * entry.norm));
        hits.push_back({entry.chunk_id, score});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    hits.resize(std::min(k, hits.size()));
    return hits;
}

void save_index(const EmbeddedIndex& index, const std::filesystem::path& path) {
    std::string payload;
    payload.append(kMagic, sizeof(kMagic));
    put_u32(payload, kFormatVersion);
    put_u32(payload, static_cast<std::uint32_t>(index.dim));
    put_u32(payload, static_cast<std::uint32_t>(index.provider_id.size()));
    payload.append(index.provider_id);
    put_u64(payload, index.entries.size());
    for (const IndexEntry& entry : index.entries) {
        put_u64(payload, static_cast<std::uint64_t>(entry.chunk_id));
        put_f64(payload, entry.norm);
        for (double v : entry.vector.values) put_f64(payload, v);
    }
    put_u64(payload, fnv1a64(payload));

    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open index file for writing: " + path.string());
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing index file: " + path.string());
    }
}

EmbeddedIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open index file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string data = buffer.str();

    if (data.size() < sizeof(kMagic) + 4 + 8) {
        throw Error(ErrorCode::CorruptFile, "index file truncated: " + path.string());
    }
    if (data.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
        throw Error(ErrorCode::CorruptFile, "not an index file: " + path.string());
    }

    Cursor cursor{data, sizeof(kMagic)};
    std::uint32_t version = cursor.u32();
    if (version != kFormatVersion) {
        throw Error(ErrorCode::VersionMismatch,
                    "index format version " + std::to_string(version) + " unsupported");
    }

    std::uint64_t stored_checksum = 0;
    for (int i = 0; i < 8; ++i) {
        stored_checksum |=
            std::uint64_t(static_cast<unsigned char>(data[data.size() - 8 + i])) << (8 * i);
    }
    std::uint64_t actual =
        fnv1a64(std::string_view(data.data(), data.size() - 8));
    if (stored_checksum != actual) {
        throw Error(ErrorCode::CorruptFile, "index checksum mismatch: " + path.string());
    }

    EmbeddedIndex index;
    index.dim = cursor.u32();
    std::uint32_t id_len = cursor.u32();
    index.provider_id = cursor.bytes(id_len);
    std::uint64_t count = cursor.u64();
    index.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexEntry entry;
        entry.chunk_id = static_cast<std::int64_t>(cursor.u64());
        entry.norm = cursor.f64();
        entry.vector.values.resize(index.dim);
        for (std::size_t d = 0; d < index.dim; ++d) entry.vector.values[d] = cursor.f64();
        index.entries.push_back(std::move(entry));
    }
    return index;
}

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP provider
// ---------------------------------------------------------------------------

OpenAiEmbeddingClient::OpenAiEmbeddingClient(std::string base_url, std::string model,
                                             std::string api_key, int max_attempts)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      max_attempts_(max_attempts) {}

std::string OpenAiEmbeddingClient::id() const { return "openai/" + model_; }

std::vector<EmbeddingVector> OpenAiEmbeddingClient::embed_batch(
    const std::vector<std::string>& texts) {
    json body = {{"model", model_}, {"input", texts}};
    std::string raw = netutil::post_json_with_retry(base_url_, "/embeddings", body.dump(),
                                                    api_key_, max_attempts_,
                                                    ErrorCode::ProviderError);
    try {
        json parsed = json::parse(raw);
        std::vector<EmbeddingVector> out(texts.size());
        const json& data = parsed.at("data");
        if (data.size() != texts.size()) {
            throw Error(ErrorCode::ProviderError, "embedding response arity mismatch");
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            const json& item = data[i];
            std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : i;
            if (slot >= out.size()) {
                throw Error(ErrorCode::ProviderError, "embedding response index out of range");
            }
            out[slot].values = item.at("embedding").get<std::vector<double>>();
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderError,
                    std::string("malformed embedding response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Deterministic local provider
// ---------------------------------------------------------------------------

LocalHashEmbeddingProvider::LocalHashEmbeddingProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "embedding dimension must be positive");
    }
}

std::string LocalHashEmbeddingProvider::id() const {
    return "local-hash-" + std::to_string(dim_);
}

EmbeddingVector LocalHashEmbeddingProvider::embed_one(const std::string& text) const {
    EmbeddingVector vec;
    vec.values.assign(dim_, 0.0);

    // Signed feature hashing over lowercase alphanumeric tokens.
    std::string token;
    auto flush_token = [&] {
        if (token.empty()) return;
        std::uint64_t h = fnv1a64(token);
        std::size_t bucket = static_cast<std::size_t>(h % dim_);
        double sign = ((h >> 32) & 1u) ? 1.0 : -1.0;
        vec.values[bucket] += sign;
        token.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush_token();
        }
    }
    flush_token();

    double norm = l2_norm(vec.values);
    if (norm == 0.0) {
        vec.values[0] = 1.0;  // tokenless input still gets a valid unit vector
        norm = 1.0;
    }
    for (double& v : vec.values) v /= norm;
    return vec;
}

std::vector<EmbeddingVector> LocalHashEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// Record / replay
// ---------------------------------------------------------------------------

ReplayEmbeddingProvider::ReplayEmbeddingProvider(const std::filesystem::path& fixture)
    : id_("replay-embeddings") {
    std::ifstream in(fixture);
    if (!in) return;  // usable only for runs that never embed (warm caches)
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded()) {
            throw Error(ErrorCode::CorruptFile, "bad line in " + fixture.string());
        }
        EmbeddingVector vec;
        vec.values = record.at("values").get<std::vector<double>>();
        by_hash_[record.at("hash").get<std::string>()] = std::move(vec);
        id_ = record.at("model").get<std::string>();
    }
}

std::string ReplayEmbeddingProvider::id() const { return id_; }

std::vector<EmbeddingVector> ReplayEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        std::string digest = text_digest(id_, text);
        auto it = by_hash_.find(digest);
        if (it == by_hash_.end()) {
            throw Error(ErrorCode::ReplayMiss,
                        "no recorded embedding for text starting \"" + text.substr(0, 40) + "\"");
        }
        out.push_back(it->second);
    }
    return out;
}

RecordingEmbeddingProvider::RecordingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                       std::filesystem::path fixture)
    : inner_(std::move(inner)), fixture_(std::move(fixture)) {}

std::string RecordingEmbeddingProvider::id() const { return inner_->id(); }

std::vector<EmbeddingVector> RecordingEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> vectors = inner_->embed_batch(texts);

    std::lock_guard<std::mutex> lock(write_mutex_);
    if (fixture_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(fixture_.parent_path(), ec);
    }
    std::ofstream out(fixture_, std::ios::app);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot append to " + fixture_.string());
    }
    for (std::size_t i = 0; i < texts.size() && i < vectors.size(); ++i) {
        nlohmann::ordered_json record = {{"hash", text_digest(inner_->id(), texts[i])},
                                         {"model", inner_->id()},
                                         {"text", texts[i]},
                                         {"values", vectors[i].values}};
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing " + fixture_.string());
    }
    return vectors;
}

}  // namespace sapphire::vecstore
