#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace te {

enum class ErrorCode {
  InvalidArgument,
  EmptySet,
  UnnormalizedWeights,
  AllZero,
  NegativeWeight,
  PromptTooLong,
  BackendUnavailable,
  MalformedResponse,
  CapabilityMissing,
  TokenizationMismatch,
  CacheCorrupt,
  ScriptMiss,
  Underflow,
  NoValidSamples,
  AmbiguousChoices,
  DataMissing,
  ChecksumMismatch,
  MissingOffer,
  DegenerateVariance,
  EmptyCategory,
  IncompleteGrid,
  NoValidEstimates,
  LengthMismatch,
  Empty,
  LevelOutOfRange,
  PartialRun,
  MissingRun,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind of failure, not the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace te
