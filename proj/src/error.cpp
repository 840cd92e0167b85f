#include "te/error.hpp"

namespace te {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::UnnormalizedWeights: return "UnnormalizedWeights";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::PromptTooLong: return "PromptTooLong";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::CapabilityMissing: return "CapabilityMissing";
    case ErrorCode::TokenizationMismatch: return "TokenizationMismatch";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::ScriptMiss: return "ScriptMiss";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::NoValidSamples: return "NoValidSamples";
    case ErrorCode::AmbiguousChoices: return "AmbiguousChoices";
    case ErrorCode::DataMissing: return "DataMissing";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MissingOffer: return "MissingOffer";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::EmptyCategory: return "EmptyCategory";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::NoValidEstimates: return "NoValidEstimates";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::PartialRun: return "PartialRun";
    case ErrorCode::MissingRun: return "MissingRun";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace te
