#include "sapphire/utf8.hpp"

namespace sapphire::utf8 {

namespace {

// Returns the sequence length announced by a lead byte, or 0 for a byte that
// cannot start a sequence.
int lead_length(unsigned char b) {
    if (b < 0x80) return 1;
    if ((b & 0xE0) == 0xC0) return 2;
    if ((b & 0xF0) == 0xE0) return 3;
    if ((b & 0xF8) == 0xF0) return 4;
    return 0;
}

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

std::vector<char32_t> decode(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char lead = static_cast<unsigned char>(text[i]);
        int len = lead_length(lead);
        if (len <= 1) {
            out.push_back(static_cast<char32_t>(lead));
            ++i;
            continue;
        }
        if (i + static_cast<std::size_t>(len) > text.size()) {
            out.push_back(static_cast<char32_t>(lead));
            ++i;
            continue;
        }
        char32_t cp = lead & (0x7F >> len);
        bool valid = true;
        for (int k = 1; k < len; ++k) {
            unsigned char b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
            if (!is_continuation(b)) {
                valid = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!valid) {
            out.push_back(static_cast<char32_t>(lead));
            ++i;
            continue;
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(len);
    }
    return out;
}

std::string encode(const char32_t* begin, const char32_t* end) {
    std::string out;
    out.reserve(static_cast<std::size_t>(end - begin));
    for (const char32_t* p = begin; p != end; ++p) {
        char32_t cp = *p;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::string encode(const std::vector<char32_t>& cps) {
    return encode(cps.data(), cps.data() + cps.size());
}

std::size_t length(std::string_view text) { return decode(text).size(); }

std::string substr(std::string_view text, std::size_t start, std::size_t end) {
    std::vector<char32_t> cps = decode(text);
    if (start > cps.size()) start = cps.size();
    if (end > cps.size()) end = cps.size();
    if (start >= end) return {};
    return encode(cps.data() + start, cps.data() + end);
}

bool is_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
           cp == U'\v';
}

}  // namespace sapphire::utf8
