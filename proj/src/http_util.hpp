/// @file http_util.hpp
/// @brief Internal HTTP helpers shared by the provider clients. Not installed.
#pragma once

#include <string>

#include "sapphire/errors.hpp"

namespace sapphire::netutil {

/// "https://host:port/some/prefix" -> origin "https://host:port",
/// path_prefix "/some/prefix" (no trailing slash, may be empty).
/// Throws InvalidConfig on anything that is not an http(s) URL.
struct ParsedUrl {
    std::string origin;
    std::string path_prefix;
};
ParsedUrl parse_base_url(const std::string& base_url);

/// POSTs a JSON body and returns the response body on HTTP 200.
/// Retries transport failures and non-200 statuses with linear backoff,
/// then throws Error(on_failure, ...).
std::string post_json_with_retry(const std::string& base_url, const std::string& path,
                                 const std::string& body, const std::string& bearer_token,
                                 int max_attempts, ErrorCode on_failure);

/// GETs a path (with query string) and returns the body on HTTP 200.
/// Same retry/backoff policy as post_json_with_retry.
std::string get_with_retry(const std::string& base_url, const std::string& path_and_query,
                           int max_attempts, ErrorCode on_failure);

/// Percent-encodes a string for use inside a query-string value.
std::string url_encode(const std::string& value);

}  // namespace sapphire::netutil
