#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flowdial {

enum class ErrorCode {
  Structural,
  PathOverflow,
  Resolution,
  UnknownState,
  AmbiguousState,
  UnmatchedGuard,
  SessionDone,
  LoopLimit,
  SiteOutOfRange,
  ConditionCollision,
  Synthesis,
  UnknownFlowchart,
  DuplicatePrediction,
  UnknownSample,
  Io,
  Usage,
  RetriesExhausted,
  AuthFailure,
  Timeout,
  BadResponse,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the guard matcher; carries the guards the user could have chosen.
class UnmatchedGuardError : public Error {
 public:
  UnmatchedGuardError(const std::string& message, std::vector<std::string> options)
      : Error(ErrorCode::UnmatchedGuard, message), options_(std::move(options)) {}

  const std::vector<std::string>& options() const noexcept { return options_; }

 private:
  std::vector<std::string> options_;
};

}  // namespace flowdial
