#include "nesscorr/steady_state.hpp"

#include "nesscorr/error.hpp"
#include "nesscorr/linalg.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace nesscorr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void hermitize(Matrix& m) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    m(j, j) = Complex(m(j, j).real(), 0.0);
    for (Index i = j + 1; i < n; ++i) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  }
}

// sigma o C, nonzero only on the pattern.
Matrix dephasing_source(const Vector& restricted, const NetworkModel& model,
                        const DephasingPattern& pattern) {
  const Index n = model.n_modes;
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < pattern.indices.size(); ++j) {
    const auto& [m, mp] = pattern.indices[j];
    s(m, mp) = model.dephasing(m, mp) * restricted(static_cast<Index>(j));
  }
  return s;
}

// Solves H C + C H^H + sigma o C = -source with the restricted system, or the
// plain closed form when there is no dephasing.
Matrix solve_for_source(const Matrix& source, const NetworkModel& model, const SpectralData& spec,
                        const DephasingPattern& pattern, const RestrictedSolver* solver) {
  CorrelationMatrix base = lyapunov_steady_state(spec, source);
  if (solver == nullptr) return std::move(base.values);
  const Vector restricted = solver->solve(restrict_to_pattern(base.values, pattern));
  return complete_correlation_matrix(restricted, model, spec, pattern, source).values;
}

}  // namespace

PhysicalityReport check_physical(const CorrelationMatrix& c) {
  PhysicalityReport r;
  const Matrix& m = c.values;
  const double scale = linalg::max_abs(m);
  r.hermitian_defect = scale > 0.0 ? linalg::max_abs(m - m.adjoint()) / scale : 0.0;
  if (m.size() == 0) return r;
  const RealVector eig = linalg::hermitian_eigenvalues(0.5 * (m + m.adjoint()));
  r.min_eigenvalue = eig.minCoeff();
  r.max_eigenvalue = eig.maxCoeff();
  return r;
}

CorrelationMatrix lyapunov_steady_state(const SpectralData& spec, const Matrix& source) {
  const Matrix& v = spec.right_vectors;
  const Matrix& w = spec.left_vectors;
  Matrix tilde = w.adjoint() * source * w;
  tilde.array() *= spec.delta.array();
  Matrix c = v * tilde * v.adjoint();
  hermitize(c);
  return {std::move(c)};
}

RestrictedSolver::RestrictedSolver(const RestrictedSuperoperator& d, double max_condition) {
  Matrix system = -d.entries;
  system.diagonal().array() += 1.0;
  lu_.compute(system);
  const double rcond = lu_.rcond();
  condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    std::ostringstream os;
    os << "(1 - d) is singular to working precision (condition estimate " << condition_
       << "); the steady state is not unique";
    throw SolverError(ErrorCode::singular_system, os.str());
  }
}

Vector RestrictedSolver::solve(const Vector& rhs) const { return lu_.solve(rhs); }

Vector solve_restricted(const Vector& c_gamma_restricted, const RestrictedSuperoperator& d) {
  return RestrictedSolver(d).solve(c_gamma_restricted);
}

Vector restrict_to_pattern(const Matrix& c, const DephasingPattern& pattern) {
  Vector out(pattern.n_sigma);
  for (std::size_t j = 0; j < pattern.indices.size(); ++j) {
    const auto& [m, mp] = pattern.indices[j];
    out(static_cast<Index>(j)) = c(m, mp);
  }
  return out;
}

CorrelationMatrix complete_correlation_matrix(const Vector& restricted, const NetworkModel& model,
                                              const SpectralData& spec,
                                              const DephasingPattern& pattern,
                                              const Matrix& source) {
  Matrix lesser = source + dephasing_source(restricted, model, pattern);
  CorrelationMatrix c = lyapunov_steady_state(spec, lesser);
  if (pattern.n_sigma > 0) {
    const double defect = (restrict_to_pattern(c.values, pattern) - restricted).cwiseAbs().maxCoeff();
    if (defect > 1e-8) {
      std::ostringstream os;
      os << "restricted entries of the completed correlation matrix deviate by " << defect;
      throw SolverError(ErrorCode::consistency_failure, os.str());
    }
  }
  return c;
}

CorrelationMatrix complete_correlation_matrix(const Vector& restricted, const NetworkModel& model,
                                              const SpectralData& spec) {
  return complete_correlation_matrix(restricted, model, spec, dephasing_pattern(model),
                                     model.gamma_plus);
}

Matrix stationarity_residual(const Matrix& c, const NetworkModel& model) {
  const Index n = c.rows();
  const Vector diag = c.diagonal();
  Matrix off = c;
  off.diagonal().setZero();

  // -i [H, C]
  Matrix r = -kI * (model.hopping * off - off * model.hopping);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) r(i, j) -= kI * model.hopping(i, j) * (diag(j) - diag(i));

  // -{gamma, C}/2
  const Matrix gamma = model.gamma();
  if (linalg::is_diagonal(gamma)) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) r(i, j) -= 0.5 * (gamma(i, i) + gamma(j, j)) * c(i, j);
  } else {
    r -= 0.5 * (gamma * off + off * gamma);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) r(i, j) -= 0.5 * gamma(i, j) * (diag(i) + diag(j));
  }

  r += model.gamma_plus;

  // sigma o C - {diag(sigma), C}/2
  const RealMatrix& s = model.dephasing;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) r(i, j) += (s(i, j) - 0.5 * (s(i, i) + s(j, j))) * c(i, j);
  return r;
}

SteadyStateResult solve_steady_state(const NetworkModel& model, const SteadyStateOptions& options) {
  const auto start = Clock::now();
  require_valid(model);

  SteadyStateResult result;
  const DephasingPattern pattern = dephasing_pattern(model, options.pattern_zero_tol);
  result.pattern_kind = pattern.kind;
  result.n_sigma = pattern.n_sigma;
  result.strategy = choose_strategy(model.n_modes, pattern);

  const auto t_spec = Clock::now();
  const SpectralData spec = decompose(effective_hamiltonian(model), options.decompose);
  result.decompose_seconds = seconds_since(t_spec);
  result.spectral_condition = spec.condition_number;

  std::unique_ptr<RestrictedSolver> solver;
  if (pattern.n_sigma > 0) {
    RestrictedSuperoperator d = form_restricted_superoperator(spec, model, pattern, options.formation);
    result.formation = d.info;
    solver = std::make_unique<RestrictedSolver>(d, options.max_condition);
    result.system_condition = solver->condition_estimate();
  } else {
    result.formation.tag = StrategyTag::lyapunov_only;
    result.formation.kernel = FormationKernel::direct;
  }

  Matrix c = solve_for_source(model.gamma_plus, model, spec, pattern, solver.get());
  Matrix residual = stationarity_residual(c, model);
  double norm = residual.norm();
  result.residual_history.push_back(norm);
  for (int step = 0; step < options.refinement_steps && norm > 0.0; ++step) {
    Matrix candidate = c + solve_for_source(residual, model, spec, pattern, solver.get());
    hermitize(candidate);
    Matrix candidate_residual = stationarity_residual(candidate, model);
    const double candidate_norm = candidate_residual.norm();
    // Stalled passes are kept; only a doubling of the residual is rejected.
    if (!(candidate_norm < 2.0 * norm)) break;
    c = std::move(candidate);
    residual = std::move(candidate_residual);
    const bool stalled = candidate_norm > 0.5 * norm;
    norm = candidate_norm;
    result.residual_history.push_back(norm);
    if (stalled) break;
  }

  result.correlation.values = std::move(c);
  if (options.check_physical) result.physicality = check_physical(result.correlation);
  result.wall_seconds = seconds_since(start);
  return result;
}

CorrelationMatrix steady_state(const NetworkModel& model) {
  return solve_steady_state(model).correlation;
}

}  // namespace nesscorr
