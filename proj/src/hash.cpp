#include "sapphire/hash.hpp"

#include <cstdio>

namespace sapphire {

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

namespace {

std::string format_temperature(double temperature) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", temperature);
    return std::string(buf);
}

}  // namespace

std::string request_digest(std::string_view model_id, double temperature,
                           std::string_view prompt) {
    std::string material;
    material.reserve(model_id.size() + prompt.size() + 24);
    material.append(model_id);
    material.push_back('\x1e');
    material.append(format_temperature(temperature));
    material.push_back('\x1e');
    material.append(prompt);
    return to_hex(fnv1a64(material));
}

std::string text_digest(std::string_view model_id, std::string_view text) {
    std::string material;
    material.reserve(model_id.size() + text.size() + 1);
    material.append(model_id);
    material.push_back('\x1e');
    material.append(text);
    return to_hex(fnv1a64(material));
}

}  // namespace sapphire
