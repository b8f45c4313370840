#pragma once

#include "nesscorr/model.hpp"
#include "nesscorr/steady_state.hpp"
#include "nesscorr/types.hpp"

#include <filesystem>
#include <ostream>
#include <vector>

namespace nesscorr {

// Reference paths that do not go through the spectral closed form: direct
// evaluation of the equation of motion, fixed-step time integration, and the
// vectorized N^2 x N^2 steady-state solve.

// -i[H, C] + gamma_plus - {gamma, C}/2 + sigma o C - {diag(sigma), C}/2
Matrix eom_rhs(const CorrelationMatrix& c, const NetworkModel& model);

struct Trajectory {
  std::vector<double> times;
  std::vector<CorrelationMatrix> states;
  std::vector<double> residuals;  // ||eom_rhs||_F at each snapshot
  // Whether the recorded residuals never increase; reported, not enforced.
  bool residual_monotone = true;
};

struct StepControl {
  double step = 0.0;              // <= 0: 0.1 / max(||gamma||, ||sigma||, ||H||)
  std::size_t record_every = 0;   // 0: only the initial and final states
  std::size_t max_steps = 50'000'000;
};

// Classic RK4 from c0 to t_final. Throws StepTooLarge when a snapshot has an
// eigenvalue outside [-1e-3, 1 + 1e-3].
Trajectory integrate(const NetworkModel& model, const CorrelationMatrix& c0, double t_final,
                     const StepControl& control = {});

// Column-major vectorization: vec(C)[i + N j] = C(i, j).
Eigen::VectorXcd vectorize(const Matrix& c);
Matrix unvectorize(const Eigen::VectorXcd& v, Index n);

// Linear part L of the equation of motion acting on vec(C), so that
// vec(eom_rhs(C)) = L vec(C) + vec(gamma_plus).
Matrix lindblad_superoperator(const NetworkModel& model);

struct BruteForceOptions {
  Index max_modes = 64;
};

// Solves L vec(C) = -vec(gamma_plus) with a rank-revealing LU. Throws
// SingularLindbladian when L is rank deficient.
CorrelationMatrix brute_force_steady_state(const NetworkModel& model,
                                           const BruteForceOptions& options = {});

// CSV with columns t, n_1..n_N, residual.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace nesscorr
