#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvreg {

enum class ErrorCode {
  InvalidArgument,
  InvalidRotation,
  InvalidPointCloud,
  DegenerateMatrix,
  EmptyTarget,
  MissingFeatures,
  DimensionMismatch,
  DegenerateConfiguration,
  ZeroWeightSum,
  DuplicateEdge,
  IndexOutOfRange,
  EmptyResiduals,
  DisconnectedGraph,
  EigenSolverFailure,
  TooFewClouds,
  DisconnectedInput,
  EmptyErrors,
  EmptyPairs,
  LengthMismatch,
  MalformedHeader,
  UnsupportedFormat,
  TruncatedPayload,
  TrailingData,
  MalformedEntry,
  NonRigidMatrix,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mvreg
