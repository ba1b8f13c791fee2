#pragma once

#include <stdexcept>
#include <string>

namespace solitary {

enum class ErrorKind {
  InvalidInput,
  NonConvergence,
  SignViolation,
  GridMismatch,
  SingularityOnTrajectory,
  SingularityInWindow,
  StepRejected,
  BoxTooSmall,
  UnderResolved,
  MonitorBreach,
  WindowClipped,
  KernelResidualTooLarge,
  TooFewSnapshots,
  WindowViolation,
  InsufficientEpsilons,
  MissingArtifacts,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SignViolation: return "SignViolation";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::SingularityOnTrajectory: return "SingularityOnTrajectory";
    case ErrorKind::SingularityInWindow: return "SingularityInWindow";
    case ErrorKind::StepRejected: return "StepRejected";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::MonitorBreach: return "MonitorBreach";
    case ErrorKind::WindowClipped: return "WindowClipped";
    case ErrorKind::KernelResidualTooLarge: return "KernelResidualTooLarge";
    case ErrorKind::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorKind::WindowViolation: return "WindowViolation";
    case ErrorKind::InsufficientEpsilons: return "InsufficientEpsilons";
    case ErrorKind::MissingArtifacts: return "MissingArtifacts";
  }
  return "Unknown";
}

/// Process exit code for a failure of the given kind: 3 for bad input,
/// 4 for a numerical abort.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::GridMismatch:
    case ErrorKind::BoxTooSmall:
    case ErrorKind::TooFewSnapshots:
    case ErrorKind::InsufficientEpsilons:
    case ErrorKind::MissingArtifacts:
      return 3;
    default:
      return 4;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace solitary
