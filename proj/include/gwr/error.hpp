#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwr {

enum class ErrorCode {
  NotPositiveSemidefinite,
  NotPositiveDefinite,
  DimensionMismatch,
  LengthMismatch,
  OutOfRange,
  NoConvergence,
  DegenerateInput,
  DegenerateReference,
  EmptyInput,
  EmptyBlock,
  SingularHessian,
  InvalidArgument,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class so callers
/// (the CLI in particular) can map it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by the numbers rather than by malformed input.
  bool numerical() const noexcept {
    switch (code_) {
      case ErrorCode::NotPositiveSemidefinite:
      case ErrorCode::NotPositiveDefinite:
      case ErrorCode::NoConvergence:
      case ErrorCode::DegenerateInput:
      case ErrorCode::DegenerateReference:
      case ErrorCode::SingularHessian:
      case ErrorCode::OutOfRange:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

inline void require_same_dim(long a, long b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace gwr
