#include "sapphire/errors.hpp"

namespace sapphire {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyName: return "EmptyName";
        case ErrorCode::SourceUnavailable: return "SourceUnavailable";
        case ErrorCode::NoArticlesFound: return "NoArticlesFound";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::MissingPlaceholderValue: return "MissingPlaceholderValue";
        case ErrorCode::ReplayMiss: return "ReplayMiss";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyHypothetical: return "EmptyHypothetical";
        case ErrorCode::TrialFailed: return "TrialFailed";
        case ErrorCode::AllTrialsFailed: return "AllTrialsFailed";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NoScores: return "NoScores";
        case ErrorCode::ArtifactParseError: return "ArtifactParseError";
    }
    return "UnknownError";
}

}  // namespace sapphire
