#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sapphire {

/// Every failure mode the library surfaces. The CLI maps each code to a
/// distinct process exit status (see cli.hpp).
enum class ErrorCode {
    InvalidArgument,
    InvalidConfig,
    EmptyName,
    SourceUnavailable,
    NoArticlesFound,
    ProviderError,
    DimensionMismatch,
    ZeroVector,
    EmptyIndex,
    IoError,
    VersionMismatch,
    CorruptFile,
    MissingPlaceholderValue,
    ReplayMiss,
    ParseError,
    EmptyHypothetical,
    TrialFailed,
    AllTrialsFailed,
    OutOfRange,
    InsufficientSamples,
    NoScores,
    ArtifactParseError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sapphire
