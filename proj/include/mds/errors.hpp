#pragma once

#include <stdexcept>
#include <string>

namespace mds {

// Every failure mode the library can raise.  The code survives the trip
// through the exception so callers (and the CLI) can branch on it without
// string matching.
enum class ErrorCode {
  // input validation
  AsymmetricInput,
  NegativeWeight,
  AllZeroWeights,
  DisconnectedWeightGraph,
  NotSymmetric,
  NonSquare,
  RaggedRows,
  NonNumericToken,
  UnknownDataset,
  IoFailure,
  InvalidArgument,
  // numerical conditions
  DegenerateDenominator,
  DegenerateConfiguration,
  DegenerateInput,
  SingularSystem,
  InsufficientPositiveEigenvalues,
  IndefiniteMajorizer,
  InitialStressAboveOne,
  NonDifferentiablePoint,
  DirectionViolatesCondition,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::DisconnectedWeightGraph: return "DisconnectedWeightGraph";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumericToken: return "NonNumericToken";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InsufficientPositiveEigenvalues: return "InsufficientPositiveEigenvalues";
    case ErrorCode::IndefiniteMajorizer: return "IndefiniteMajorizer";
    case ErrorCode::InitialStressAboveOne: return "InitialStressAboveOne";
    case ErrorCode::NonDifferentiablePoint: return "NonDifferentiablePoint";
    case ErrorCode::DirectionViolatesCondition: return "DirectionViolatesCondition";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Input errors are the caller's fault (bad files, bad flags); the rest
  // surface numerical trouble in an otherwise well-formed problem.
  bool is_input_error() const noexcept {
    switch (code_) {
      case ErrorCode::AsymmetricInput:
      case ErrorCode::NegativeWeight:
      case ErrorCode::AllZeroWeights:
      case ErrorCode::DisconnectedWeightGraph:
      case ErrorCode::NotSymmetric:
      case ErrorCode::NonSquare:
      case ErrorCode::RaggedRows:
      case ErrorCode::NonNumericToken:
      case ErrorCode::UnknownDataset:
      case ErrorCode::IoFailure:
      case ErrorCode::InvalidArgument:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mds
