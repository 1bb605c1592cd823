#include "logitype/error.hpp"

namespace logitype {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateAltForObs: return "DuplicateAltForObs";
    case ErrorCode::NoChoiceForObs: return "NoChoiceForObs";
    case ErrorCode::MultipleChoicesForObs: return "MultipleChoicesForObs";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::InconsistentWeight: return "InconsistentWeight";
    case ErrorCode::DegenerateChoiceSet: return "DegenerateChoiceSet";
    case ErrorCode::SpecDataMismatch: return "SpecDataMismatch";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NonFiniteIndex: return "NonFiniteIndex";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NonFiniteObjectiveAtInit: return "NonFiniteObjectiveAtInit";
    case ErrorCode::EstimationFailure: return "EstimationFailure";
    case ErrorCode::NegativeStatBeyondSlack: return "NegativeStatBeyondSlack";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::IntegrationFailure: return "IntegrationFailure";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
      return ErrorCategory::Config;
    case ErrorCode::MissingColumn:
    case ErrorCode::DuplicateAltForObs:
    case ErrorCode::NoChoiceForObs:
    case ErrorCode::MultipleChoicesForObs:
    case ErrorCode::NonNumericCell:
    case ErrorCode::InconsistentWeight:
    case ErrorCode::DegenerateChoiceSet:
    case ErrorCode::SpecDataMismatch:
    case ErrorCode::KTooLarge:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Estimation;
  }
}

}  // namespace logitype
