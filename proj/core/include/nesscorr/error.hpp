#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nesscorr {

enum class ErrorCode {
  invalid_argument,
  invalid_model,
  non_diagonalizable,
  non_dissipative_pair,
  singular_system,
  consistency_failure,
  memory_budget_exceeded,
  step_too_large,
  singular_lindbladian,
  not_boundary_driven,
  zero_current,
  insufficient_points,
  nonpositive_resistance,
};

std::string_view to_string(ErrorCode code) noexcept;

// Input errors (bad arguments, invalid models) versus runtime solver failures.
bool is_input_error(ErrorCode code) noexcept;

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nesscorr
