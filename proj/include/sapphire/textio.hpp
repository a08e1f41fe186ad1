/// @file textio.hpp
/// @brief Whole-file text IO with project error mapping.
#pragma once

#include <filesystem>
#include <string>

namespace sapphire {

/// Reads a whole file as bytes. Throws IoError when unreadable.
std::string read_text_file(const std::filesystem::path& path);

/// Writes bytes to a file, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sapphire
