#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sapphire {

/// 64-bit FNV-1a. Stable across platforms and runs; used for fixture keys
/// and deterministic test providers, not for security.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

/// Digest of (model_id, temperature, prompt); the replay store key for chat calls.
std::string request_digest(std::string_view model_id, double temperature,
                           std::string_view prompt);

/// Digest of (model_id, text); the replay store key for embedding calls.
std::string text_digest(std::string_view model_id, std::string_view text);

}  // namespace sapphire
