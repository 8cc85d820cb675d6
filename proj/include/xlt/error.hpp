#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xlt {

enum class ErrorCode {
  // corpus
  EmptyInput,
  RaggedLine,
  InvalidTag,
  MissingColumn,
  LabelOutsideSet,
  MalformedLine,
  // translate
  UnsupportedLanguage,
  BackendFailure,
  UndeclaredPair,
  // align
  MalformedPair,
  IndexOutOfRange,
  LengthMismatch,
  // typology
  DimensionMismatch,
  ZeroVector,
  TargetMissingVector,
  NoCandidate,
  // strategy
  UnsupportedVariant,
  ProjectionCollapse,
  // model
  EmptyPlan,
  LabelSetMismatch,
  TaskMismatch,
  LabelOrderMismatch,
  // selection / metrics
  EmptySeries,
  InvalidBIO,
  Empty,
  ZeroTotal,
  MissingOracleValidation,
  // cli
  ConfigInvalid,
  BackendUnreachable,
  StageDependencyMissing,
  // precondition violated by the caller
  ContractViolation,
};

std::string_view to_string(ErrorCode code);

/// Process exit code for an error: 2 config, 3 backend, 4 data.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, std::size_t index);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Line number, request index or instance index, depending on the code.
  std::optional<std::size_t> index() const noexcept { return index_; }

  /// Translation hop (1 or 2) for errors raised inside a roundtrip.
  std::optional<int> hop() const noexcept { return hop_; }
  Error with_hop(int hop) const;

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> index_;
  std::optional<int> hop_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);
[[noreturn]] void fail(ErrorCode code, const std::string& message,
                       std::size_t index);

}  // namespace xlt
