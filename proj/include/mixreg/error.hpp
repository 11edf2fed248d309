#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixreg {

enum class ErrorCode {
  InvalidInput,
  NonFiniteInput,
  SingularGram,
  ZeroVector,
  QuadratureNotConverged,
  InitializationFailure,
  NotFoundWithinBudget,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. The code is stable; the message is
/// for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mixreg
