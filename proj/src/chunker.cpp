#include "sapphire/chunker.hpp"

#include <algorithm>

#include "sapphire/utf8.hpp"

namespace sapphire::chunker {

namespace {

using CodePoints = std::vector<char32_t>;

struct Fragment {
    std::size_t start;
    std::size_t end;
    std::size_t length() const { return end - start; }
};

// Finds `sep` in doc[from, to); npos when absent.
std::size_t find_separator(const CodePoints& doc, std::size_t from, std::size_t to,
                           const CodePoints& sep) {
    if (sep.empty() || sep.size() > to - from) return std::string::npos;
    auto it = std::search(doc.begin() + static_cast<std::ptrdiff_t>(from),
                          doc.begin() + static_cast<std::ptrdiff_t>(to), sep.begin(), sep.end());
    if (it == doc.begin() + static_cast<std::ptrdiff_t>(to)) return std::string::npos;
    return static_cast<std::size_t>(it - doc.begin());
}

// Recursively splits doc[from, to) so every emitted fragment fits chunk_size.
// sep_index points at the first separator still available at this level.
void split_range(const CodePoints& doc, std::size_t from, std::size_t to,
                 const std::vector<CodePoints>& seps, std::size_t sep_index,
                 std::size_t chunk_size, std::vector<Fragment>& out) {
    if (from >= to) return;
    if (to - from <= chunk_size) {
        out.push_back({from, to});
        return;
    }

    // Pick the first remaining separator that occurs here; the final "" always does.
    std::size_t chosen = seps.size() - 1;
    for (std::size_t s = sep_index; s < seps.size(); ++s) {
        if (seps[s].empty() || find_separator(doc, from, to, seps[s]) != std::string::npos) {
            chosen = s;
            break;
        }
    }
    const CodePoints& sep = seps[chosen];

    if (sep.empty()) {
        // The empty separator splits per character.
        for (std::size_t pos = from; pos < to; ++pos) {
            out.push_back({pos, pos + 1});
        }
        return;
    }

    std::size_t piece_start = from;
    while (piece_start < to) {
        std::size_t hit = find_separator(doc, piece_start, to, sep);
        std::size_t piece_end = (hit == std::string::npos) ? to : hit + sep.size();
        if (piece_end - piece_start > chunk_size) {
            split_range(doc, piece_start, piece_end, seps, chosen + 1, chunk_size, out);
        } else {
            out.push_back({piece_start, piece_end});
        }
        piece_start = piece_end;
    }
}

std::string trimmed_text(const CodePoints& doc, std::size_t start, std::size_t end) {
    while (start < end && utf8::is_space(doc[start])) ++start;
    while (end > start && utf8::is_space(doc[end - 1])) --end;
    return utf8::encode(doc.data() + start, doc.data() + end);
}

}  // namespace

std::vector<std::string> default_separators() { return {"\n\n", "\n", " ", ""}; }

ChunkCorpus split_text(const std::string& text, std::size_t chunk_size, std::size_t overlap,
                       const std::vector<std::string>& separators) {
    if (chunk_size == 0) {
        throw Error(ErrorCode::InvalidConfig, "chunk_size must be positive");
    }
    if (overlap >= chunk_size) {
        throw Error(ErrorCode::InvalidConfig, "overlap must be smaller than chunk_size");
    }
    if (separators.empty() || !separators.back().empty()) {
        throw Error(ErrorCode::InvalidConfig, "separator list must end with \"\"");
    }

    ChunkCorpus corpus;
    corpus.chunk_size = chunk_size;
    corpus.overlap = overlap;
    corpus.separators = separators;

    const CodePoints doc = utf8::decode(text);
    if (doc.empty()) return corpus;

    std::vector<CodePoints> seps;
    seps.reserve(separators.size());
    for (const std::string& s : separators) seps.push_back(utf8::decode(s));

    std::vector<Fragment> fragments;
    split_range(doc, 0, doc.size(), seps, 0, chunk_size, fragments);

    // Greedy packing. `window` holds the fragments of the chunk being built.
    std::vector<Fragment> window;
    std::size_t window_len = 0;
    auto emit = [&](const std::vector<Fragment>& frags) {
        CharSpan span{frags.front().start, frags.back().end};
        std::string body = trimmed_text(doc, span.start, span.end);
        if (body.empty()) return;  // separator-only chunk
        Chunk chunk;
        chunk.id = static_cast<std::int64_t>(corpus.chunks.size());
        chunk.text = std::move(body);
        chunk.char_span = span;
        corpus.chunks.push_back(std::move(chunk));
    };

    for (const Fragment& frag : fragments) {
        if (!window.empty() && window_len + frag.length() > chunk_size) {
            emit(window);
            // Carry a trailing portion of the closed chunk into the next one.
            // The carried suffix is capped by `overlap`, must leave room for
            // the incoming fragment, and never spans the whole previous chunk
            // (keeps chunk starts strictly increasing).
            std::vector<Fragment> carried;
            std::size_t carried_len = 0;
            for (std::size_t take = 1; take < window.size(); ++take) {
                const Fragment& candidate = window[window.size() - take];
                std::size_t grown = carried_len + candidate.length();
                if (grown > overlap || grown + frag.length() > chunk_size) break;
                carried.insert(carried.begin(), candidate);
                carried_len = grown;
            }
            window = std::move(carried);
            window_len = carried_len;
        }
        window.push_back(frag);
        window_len += frag.length();
    }
    if (!window.empty()) emit(window);

    return corpus;
}

void assign_source_titles(ChunkCorpus& corpus, const std::vector<SourceSpan>& sources) {
    for (Chunk& chunk : corpus.chunks) {
        for (const SourceSpan& src : sources) {
            if (chunk.char_span.start >= src.span.start && chunk.char_span.start < src.span.end) {
                chunk.source_title = src.title;
                break;
            }
        }
    }
}

}  // namespace sapphire::chunker
