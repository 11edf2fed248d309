#include "mixreg/error.hpp"

namespace mixreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::InitializationFailure: return "InitializationFailure";
    case ErrorCode::NotFoundWithinBudget: return "NotFoundWithinBudget";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace mixreg
