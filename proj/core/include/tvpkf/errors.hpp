#pragma once

#include <stdexcept>
#include <string>

namespace tvpkf {

enum class ErrorCode {
  DimensionMismatch,
  NotSymmetric,
  IndefiniteMatrix,
  SingularDelta,
  IndefiniteLinearizationMatrix,
  NonFiniteState,
  NonFiniteLikelihood,
  IndefiniteResidualCov,
  CovarianceNotPsd,
  SingularPredictedCov,
  LayoutMismatch,
  IndexOutOfRange,
  InvalidSpec,
  InvalidScenario,
  InvalidConfig,
  PathTooShort,
  TooFewReplications,
  ZeroTruth,
  SeriesTooShort,
  MissingData,
  IoFailure,
};

const char* error_code_name(ErrorCode code);

/// All recoverable failures in the library carry an ErrorCode so callers
/// (in particular the likelihood tuner) can map them to penalties or exits.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::IndefiniteMatrix: return "IndefiniteMatrix";
    case ErrorCode::SingularDelta: return "SingularDelta";
    case ErrorCode::IndefiniteLinearizationMatrix: return "IndefiniteLinearizationMatrix";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorCode::IndefiniteResidualCov: return "IndefiniteResidualCov";
    case ErrorCode::CovarianceNotPsd: return "CovarianceNotPsd";
    case ErrorCode::SingularPredictedCov: return "SingularPredictedCov";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::TooFewReplications: return "TooFewReplications";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

}  // namespace tvpkf
