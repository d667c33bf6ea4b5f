#ifndef TANGLE_ERRORS_HPP
#define TANGLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tangle {

enum class ErrorCode {
  NoConvergence,
  SingularJacobian,
  Degenerate,
  NotHyperbolic,
  NoIntersectionFound,
  StepFailed,
  MinStepReached,
  RankDeficient,
  NoSignChange,
  AugmentedSingular,
  KernelNotSimple,
  InsufficientPoints,
  GapTooSmall,
  AmbiguousMatch,
  BudgetExceeded,
  InvalidArgument,
  Io
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::NoIntersectionFound: return "NoIntersectionFound";
    case ErrorCode::StepFailed: return "StepFailed";
    case ErrorCode::MinStepReached: return "MinStepReached";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::AugmentedSingular: return "AugmentedSingular";
    case ErrorCode::KernelNotSimple: return "KernelNotSimple";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::GapTooSmall: return "GapTooSmall";
    case ErrorCode::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace tangle

#endif
