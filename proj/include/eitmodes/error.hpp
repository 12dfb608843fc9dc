#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eit {

enum class ErrorCode {
  InvalidArgument,
  Format,
  ProfileZero,
  NotNegativeDetuning,
  TruncationFailed,
  ConvergenceFailed,
  NonNegativeSlope,
  OffAxisField,
  BasisMismatch,
  UnstableStep,
  PowerLoss,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Format: return "Format";
    case ErrorCode::ProfileZero: return "ProfileZero";
    case ErrorCode::NotNegativeDetuning: return "NotNegativeDetuning";
    case ErrorCode::TruncationFailed: return "TruncationFailed";
    case ErrorCode::ConvergenceFailed: return "ConvergenceFailed";
    case ErrorCode::NonNegativeSlope: return "NonNegativeSlope";
    case ErrorCode::OffAxisField: return "OffAxisField";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::PowerLoss: return "PowerLoss";
  }
  return "Unknown";
}

/// Process exit code used by the CLI: 2 usage, 3 physics precondition,
/// 4 numerical failure.
constexpr int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Format:
      return 2;
    case ErrorCode::ProfileZero:
    case ErrorCode::NotNegativeDetuning:
    case ErrorCode::OffAxisField:
    case ErrorCode::BasisMismatch:
      return 3;
    case ErrorCode::TruncationFailed:
    case ErrorCode::ConvergenceFailed:
    case ErrorCode::NonNegativeSlope:
    case ErrorCode::UnstableStep:
    case ErrorCode::PowerLoss:
      return 4;
  }
  return 4;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace eit
