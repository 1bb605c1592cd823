#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logitype {

enum class ErrorCode {
  // configuration
  InvalidArgument,
  ConfigError,
  // data
  MissingColumn,
  DuplicateAltForObs,
  NoChoiceForObs,
  MultipleChoicesForObs,
  NonNumericCell,
  InconsistentWeight,
  DegenerateChoiceSet,
  SpecDataMismatch,
  // model evaluation
  DomainViolation,
  NonFiniteIndex,
  InvalidParams,
  // estimation and inference
  NonFiniteObjectiveAtInit,
  EstimationFailure,
  NegativeStatBeyondSlack,
  TooManyFailures,
  KTooLarge,
  EmptySelection,
  // derivation oracle
  DegenerateDenominator,
  IntegrationFailure,
};

std::string_view to_string(ErrorCode code);

/// Broad classes used for process exit codes.
enum class ErrorCategory { Config, Data, Estimation };

ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace logitype
