#pragma once

#include "nesscorr/model.hpp"
#include "nesscorr/parallel.hpp"
#include "nesscorr/spectral.hpp"
#include "nesscorr/types.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace nesscorr {

/// Two-point correlations C_{m m'} = <c^dag_{m'} c_m>.
struct CorrelationMatrix {
  Matrix values;

  Index size() const noexcept { return values.rows(); }
};

struct PhysicalityReport {
  double hermitian_defect = 0.0;  // max|C - C^H| / max|C|
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;

  // Hermitian to 1e-10 and spectrum inside [-1e-8, 1 + 1e-8].
  bool ok() const noexcept {
    return hermitian_defect <= 1e-10 && min_eigenvalue >= -1e-8 && max_eigenvalue <= 1.0 + 1e-8;
  }
};

PhysicalityReport check_physical(const CorrelationMatrix& c);

// ---------------------------------------------------------------------------
// Cost model and dispatch

enum class StrategyTag { lyapunov_only, restricted_per_element, restricted_via_full, full_vectorized };

std::string_view to_string(StrategyTag tag) noexcept;

struct SolveStrategy {
  StrategyTag tag = StrategyTag::lyapunov_only;
  double predicted_cost = 0.0;  // max[min(Ns^2 N^2, N^5), Ns^3, N^3]
};

SolveStrategy choose_strategy(Index n_modes, const DephasingPattern& pattern);
double predicted_cost(double n_modes, double n_sigma);

// ---------------------------------------------------------------------------
// Restricted dephasing superoperator

// direct:   evaluate the superoperator entries with the Delta matrix as is,
//           per-element or via full columns depending on the strategy tag.
// factored: write Delta = L L^H (pivoted Cholesky, truncated at
//           factor_tolerance) and accumulate rank-one contributions; cost
//           K |S|^2 N instead of |S|^2 N^2 when the numerical rank K is small.
// automatic picks factored when K <= max_factor_fraction * N.
enum class FormationKernel { automatic, direct, factored };

std::string_view to_string(FormationKernel kernel) noexcept;

struct FormationOptions {
  ParallelOptions parallel{};
  FormationKernel kernel = FormationKernel::automatic;
  std::optional<StrategyTag> force_tag;
  double factor_tolerance = 1e-17;
  double max_factor_fraction = 0.25;
  std::size_t memory_budget_bytes = std::size_t{8} << 30;
};

struct FormationInfo {
  StrategyTag tag = StrategyTag::restricted_per_element;
  FormationKernel kernel = FormationKernel::direct;
  Index factor_rank = 0;
  double seconds = 0.0;
};

/// Entry (i, j) couples output pair pattern.indices[i] = (o, o') to input pair
/// pattern.indices[j] = (m, m'):
///   d_ij = sigma_{m m'} [V (Delta o (W^H |m><m'| W)) V^H]_{o o'}.
/// For onsite patterns this is the occupation-to-occupation map.
struct RestrictedSuperoperator {
  Matrix entries;
  DephasingPattern pattern;
  FormationInfo info;
};

// V [Delta o (W^H source W)] V^H.
CorrelationMatrix lyapunov_steady_state(const SpectralData& spec, const Matrix& source);

RestrictedSuperoperator form_restricted_superoperator(const SpectralData& spec,
                                                      const NetworkModel& model,
                                                      const DephasingPattern& pattern,
                                                      const FormationOptions& options = {});

// LU of (1 - d), kept so repeated right-hand sides cost Ns^2 each.
class RestrictedSolver {
 public:
  explicit RestrictedSolver(const RestrictedSuperoperator& d, double max_condition = 1e14);

  Vector solve(const Vector& rhs) const;
  double condition_estimate() const noexcept { return condition_; }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  double condition_ = 1.0;
};

// Solves (1 - d) c = c_gamma. Throws SingularSystem when the 1-norm condition
// estimate of (1 - d) exceeds 1e14.
Vector solve_restricted(const Vector& c_gamma_restricted, const RestrictedSuperoperator& d);

// Entries of c at the pattern's index pairs, in pattern order.
Vector restrict_to_pattern(const Matrix& c, const DephasingPattern& pattern);

// Builds Sigma< = source + sigma o C from the restricted solution and applies
// the closed form. Throws ConsistencyFailure when the result's restricted
// entries differ from `restricted` by more than 1e-8.
CorrelationMatrix complete_correlation_matrix(const Vector& restricted, const NetworkModel& model,
                                              const SpectralData& spec,
                                              const DephasingPattern& pattern,
                                              const Matrix& source);
CorrelationMatrix complete_correlation_matrix(const Vector& restricted, const NetworkModel& model,
                                              const SpectralData& spec);

// ---------------------------------------------------------------------------
// End-to-end solve

struct SteadyStateOptions {
  FormationOptions formation{};
  DecomposeOptions decompose{};
  double pattern_zero_tol = 0.0;
  double max_condition = 1e14;
  // Residual-correction passes after the direct solve. Each pass re-solves
  // for the equation-of-motion residual with the factorization already held.
  // Passes stop after the first one that fails to halve the residual norm.
  int refinement_steps = 3;
  bool check_physical = true;
};

struct SteadyStateResult {
  CorrelationMatrix correlation;
  SolveStrategy strategy;
  FormationInfo formation;
  PatternKind pattern_kind = PatternKind::none;
  Index n_sigma = 0;
  double spectral_condition = 1.0;
  double system_condition = 1.0;          // condition estimate of (1 - d)
  std::vector<double> residual_history;   // ||rhs||_F after the solve and each accepted pass
  std::optional<PhysicalityReport> physicality;
  double decompose_seconds = 0.0;
  double wall_seconds = 0.0;

  double residual_norm() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

SteadyStateResult solve_steady_state(const NetworkModel& model,
                                     const SteadyStateOptions& options = {});

CorrelationMatrix steady_state(const NetworkModel& model);

// Right-hand side of the correlation-matrix equation of motion, evaluated with
// the diagonal of C split off so entries that cancel at stationarity are not
// swamped by rounding of the O(1) occupations.
Matrix stationarity_residual(const Matrix& c, const NetworkModel& model);

}  // namespace nesscorr
