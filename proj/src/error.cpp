#include "mvreg/error.hpp"

namespace mvreg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::InvalidPointCloud: return "InvalidPointCloud";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyResiduals: return "EmptyResiduals";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::TooFewClouds: return "TooFewClouds";
    case ErrorCode::DisconnectedInput: return "DisconnectedInput";
    case ErrorCode::EmptyErrors: return "EmptyErrors";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::MalformedEntry: return "MalformedEntry";
    case ErrorCode::NonRigidMatrix: return "NonRigidMatrix";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mvreg
