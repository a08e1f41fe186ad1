#include "http_util.hpp"

#include <cctype>
#include <chrono>
#include <thread>

#include <httplib.h>

namespace sapphire::netutil {

namespace {

constexpr std::chrono::milliseconds kBackoffStep{250};

void configure_client(httplib::Client& client) {
    client.set_connection_timeout(15);
    client.set_read_timeout(60);
    client.set_follow_location(true);
}

std::string status_summary(const httplib::Result& result) {
    if (!result) return "transport error: " + httplib::to_string(result.error());
    std::string body = result->body.substr(0, 200);
    return "HTTP " + std::to_string(result->status) + ": " + body;
}

}  // namespace

ParsedUrl parse_base_url(const std::string& base_url) {
    std::string rest;
    std::string scheme;
    if (base_url.rfind("https://", 0) == 0) {
        scheme = "https://";
        rest = base_url.substr(8);
    } else if (base_url.rfind("http://", 0) == 0) {
        scheme = "http://";
        rest = base_url.substr(7);
    } else {
        throw Error(ErrorCode::InvalidConfig, "base URL must start with http:// or https://: " + base_url);
    }
    std::size_t slash = rest.find('/');
    std::string host = (slash == std::string::npos) ? rest : rest.substr(0, slash);
    if (host.empty()) {
        throw Error(ErrorCode::InvalidConfig, "base URL has no host: " + base_url);
    }
    std::string prefix = (slash == std::string::npos) ? "" : rest.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {scheme + host, prefix};
}

std::string post_json_with_retry(const std::string& base_url, const std::string& path,
                                 const std::string& body, const std::string& bearer_token,
                                 int max_attempts, ErrorCode on_failure) {
    ParsedUrl url = parse_base_url(base_url);
    httplib::Client client(url.origin);
    configure_client(client);
    httplib::Headers headers;
    if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

    std::string last_failure;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto result = client.Post(url.path_prefix + path, headers, body, "application/json");
        if (result && result->status == 200) return result->body;
        last_failure = status_summary(result);
        if (attempt < max_attempts) std::this_thread::sleep_for(kBackoffStep * attempt);
    }
    throw Error(on_failure, "POST " + path + " failed after " + std::to_string(max_attempts) +
                                " attempts (" + last_failure + ")");
}

std::string get_with_retry(const std::string& base_url, const std::string& path_and_query,
                           int max_attempts, ErrorCode on_failure) {
    ParsedUrl url = parse_base_url(base_url);
    httplib::Client client(url.origin);
    configure_client(client);

    std::string last_failure;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto result = client.Get(url.path_prefix + path_and_query);
        if (result && result->status == 200) return result->body;
        last_failure = status_summary(result);
        if (attempt < max_attempts) std::this_thread::sleep_for(kBackoffStep * attempt);
    }
    throw Error(on_failure, "GET " + path_and_query + " failed after " +
                                std::to_string(max_attempts) + " attempts (" + last_failure + ")");
}

std::string url_encode(const std::string& value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0x0F]);
        }
    }
    return out;
}

}  // namespace sapphire::netutil
