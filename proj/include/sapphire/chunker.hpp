#pragma once

/// @file chunker.hpp
/// @brief Recursive character splitter producing overlapping chunks.
///
/// Splitting works on a separator hierarchy (by default paragraph, line,
/// word, character): the text is split on the first separator that occurs in
/// it, separators stay attached to the preceding fragment, and any fragment
/// still longer than the chunk size is split again with the remaining
/// separators. Fragments are then packed greedily into chunks of at most
/// `chunk_size` characters; when a chunk closes, trailing fragments of up to
/// `overlap` characters are carried into the next one. All lengths and spans
/// count Unicode code points, not bytes.

#include <cstdint>
#include <string>
#include <vector>

#include "sapphire/errors.hpp"

namespace sapphire::chunker {

/// Half-open range of code-point offsets into the source document.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const CharSpan&) const = default;
};

struct Chunk {
    std::int64_t id = 0;
    std::string text;          // trimmed; never empty
    CharSpan char_span;        // untrimmed range; substr+trim == text
    std::string source_title;  // filled in by assign_source_titles
};

struct ChunkCorpus {
    std::vector<Chunk> chunks;
    std::size_t chunk_size = 0;
    std::size_t overlap = 0;
    std::vector<std::string> separators;

    std::size_t size() const { return chunks.size(); }
};

/// Paragraph, line, word, then per-character fallback. The trailing empty
/// string guarantees the chunk-size bound can always be met.
std::vector<std::string> default_separators();

/// Requires overlap < chunk_size and a separator list ending in "";
/// throws InvalidConfig otherwise. Whitespace-only input yields zero chunks.
ChunkCorpus split_text(const std::string& text, std::size_t chunk_size, std::size_t overlap,
                       const std::vector<std::string>& separators = default_separators());

/// Span of one source article inside the merged document, in code points.
struct SourceSpan {
    std::string title;
    CharSpan span;
};

/// Labels each chunk with the article containing its span start.
void assign_source_titles(ChunkCorpus& corpus, const std::vector<SourceSpan>& sources);

}  // namespace sapphire::chunker
