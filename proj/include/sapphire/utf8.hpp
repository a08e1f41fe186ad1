#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sapphire::utf8 {

/// Decodes UTF-8 into code points. Invalid bytes are passed through one byte
/// at a time so malformed input never throws and round-trips losslessly.
std::vector<char32_t> decode(std::string_view text);

std::string encode(const char32_t* begin, const char32_t* end);
std::string encode(const std::vector<char32_t>& cps);

/// Number of code points in a UTF-8 string.
std::size_t length(std::string_view text);

/// Substring by code-point offsets [start, end).
std::string substr(std::string_view text, std::size_t start, std::size_t end);

bool is_space(char32_t cp);

}  // namespace sapphire::utf8
