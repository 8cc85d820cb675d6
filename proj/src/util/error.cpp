#include "xlt/error.hpp"

namespace xlt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RaggedLine: return "RaggedLine";
    case ErrorCode::InvalidTag: return "InvalidTag";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::LabelOutsideSet: return "LabelOutsideSet";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnsupportedLanguage: return "UnsupportedLanguage";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::UndeclaredPair: return "UndeclaredPair";
    case ErrorCode::MalformedPair: return "MalformedPair";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TargetMissingVector: return "TargetMissingVector";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::UnsupportedVariant: return "UnsupportedVariant";
    case ErrorCode::ProjectionCollapse: return "ProjectionCollapse";
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::LabelSetMismatch: return "LabelSetMismatch";
    case ErrorCode::TaskMismatch: return "TaskMismatch";
    case ErrorCode::LabelOrderMismatch: return "LabelOrderMismatch";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::InvalidBIO: return "InvalidBIO";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::MissingOracleValidation: return "MissingOracleValidation";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::StageDependencyMissing: return "StageDependencyMissing";
    case ErrorCode::ContractViolation: return "ContractViolation";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::UnsupportedVariant:
    case ErrorCode::UnsupportedLanguage:
    case ErrorCode::UndeclaredPair:
    case ErrorCode::TargetMissingVector:
    case ErrorCode::NoCandidate:
      return 2;
    case ErrorCode::BackendFailure:
    case ErrorCode::BackendUnreachable:
      return 3;
    default:
      return 4;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

Error::Error(ErrorCode code, const std::string& message, std::size_t index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message),
      index_(index) {}

Error Error::with_hop(int hop) const {
  const std::string message = detail_ + " (hop " + std::to_string(hop) + ")";
  Error out = index_ ? Error(code_, message, *index_) : Error(code_, message);
  out.hop_ = hop;
  return out;
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

void fail(ErrorCode code, const std::string& message, std::size_t index) {
  throw Error(code, message, index);
}

}  // namespace xlt
