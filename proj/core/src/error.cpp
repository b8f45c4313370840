#include "nesscorr/error.hpp"

namespace nesscorr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::invalid_model: return "InvalidModel";
    case ErrorCode::non_diagonalizable: return "NonDiagonalizable";
    case ErrorCode::non_dissipative_pair: return "NonDissipativePair";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::consistency_failure: return "ConsistencyFailure";
    case ErrorCode::memory_budget_exceeded: return "MemoryBudgetExceeded";
    case ErrorCode::step_too_large: return "StepTooLarge";
    case ErrorCode::singular_lindbladian: return "SingularLindbladian";
    case ErrorCode::not_boundary_driven: return "NotBoundaryDriven";
    case ErrorCode::zero_current: return "ZeroCurrent";
    case ErrorCode::insufficient_points: return "InsufficientPoints";
    case ErrorCode::nonpositive_resistance: return "NonpositiveResistance";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  return code == ErrorCode::invalid_argument || code == ErrorCode::invalid_model;
}

}  // namespace nesscorr
