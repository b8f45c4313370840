#include "nesscorr/dynamics.hpp"

#include "nesscorr/error.hpp"
#include "nesscorr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace nesscorr {

Matrix eom_rhs(const CorrelationMatrix& c, const NetworkModel& model) {
  const Matrix& x = c.values;
  const Matrix gamma = model.gamma();
  const RealMatrix& s = model.dephasing;
  const Matrix diag_s = s.diagonal().cast<Complex>().asDiagonal();
  Matrix rhs = -kI * (model.hopping * x - x * model.hopping);
  rhs += model.gamma_plus;
  rhs -= 0.5 * (gamma * x + x * gamma);
  rhs += s.cast<Complex>().cwiseProduct(x);
  rhs -= 0.5 * (diag_s * x + x * diag_s);
  return rhs;
}

namespace {

void check_snapshot(const Matrix& c, double t) {
  const RealVector eig = linalg::hermitian_eigenvalues(0.5 * (c + c.adjoint()));
  if (eig.size() == 0) return;
  if (eig.minCoeff() < -1e-3 || eig.maxCoeff() > 1.0 + 1e-3) {
    std::ostringstream os;
    os << "correlation spectrum left [0, 1] at t = " << t << " (eigenvalues " << eig.minCoeff()
       << " .. " << eig.maxCoeff() << "); reduce the step";
    throw SolverError(ErrorCode::step_too_large, os.str());
  }
}

}  // namespace

Trajectory integrate(const NetworkModel& model, const CorrelationMatrix& c0, double t_final,
                     const StepControl& control) {
  if (!(t_final > 0.0)) {
    throw SolverError(ErrorCode::invalid_argument, "t_final must be positive");
  }
  double step = control.step;
  if (step <= 0.0) {
    const double scale = std::max({model.gamma().norm(), model.dephasing.norm(), model.hopping.norm()});
    step = scale > 0.0 ? 0.1 / scale : t_final;
  }
  auto steps = static_cast<std::size_t>(std::ceil(t_final / step - 1e-12));
  steps = std::max<std::size_t>(steps, 1);
  if (steps > control.max_steps) {
    throw SolverError(ErrorCode::invalid_argument, "integration needs more than max_steps steps");
  }
  const double h = t_final / static_cast<double>(steps);

  Trajectory traj;
  auto record = [&](double t, const Matrix& c) {
    check_snapshot(c, t);
    const double res = eom_rhs({c}, model).norm();
    if (!traj.residuals.empty() && res > traj.residuals.back()) traj.residual_monotone = false;
    traj.times.push_back(t);
    traj.states.push_back({c});
    traj.residuals.push_back(res);
  };

  Matrix c = c0.values;
  record(0.0, c);
  for (std::size_t k = 1; k <= steps; ++k) {
    const Matrix k1 = eom_rhs({c}, model);
    const Matrix k2 = eom_rhs({c + 0.5 * h * k1}, model);
    const Matrix k3 = eom_rhs({c + 0.5 * h * k2}, model);
    const Matrix k4 = eom_rhs({c + h * k3}, model);
    c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    c = 0.5 * (c + c.adjoint()).eval();
    const bool last = k == steps;
    if (last || (control.record_every > 0 && k % control.record_every == 0)) {
      record(last ? t_final : static_cast<double>(k) * h, c);
    }
  }
  return traj;
}

Eigen::VectorXcd vectorize(const Matrix& c) {
  return Eigen::Map<const Eigen::VectorXcd>(c.data(), c.size());
}

Matrix unvectorize(const Eigen::VectorXcd& v, Index n) {
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

Matrix lindblad_superoperator(const NetworkModel& model) {
  const Index n = model.n_modes;
  const Matrix id = Matrix::Identity(n, n);
  const Matrix gamma = model.gamma();
  Matrix diag_s = Matrix::Zero(n, n);
  diag_s.diagonal() = model.dephasing.diagonal().cast<Complex>();
  // Left action A X -> (I kron A), right action X B -> (B^T kron I).
  const Matrix left = -kI * model.hopping - 0.5 * gamma - 0.5 * diag_s;
  const Matrix right = kI * model.hopping - 0.5 * gamma - 0.5 * diag_s;
  Matrix l = Matrix::Zero(n * n, n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index b = 0; b < n; ++b) {
      for (Index i = 0; i < n; ++i) {
        for (Index a = 0; a < n; ++a) {
          Complex value = 0.0;
          if (b == j) value += left(i, a);   // (A X)(i, j) = sum_a A(i, a) X(a, j)
          if (a == i) value += right(b, j);  // (X B)(i, j) = sum_b X(i, b) B(b, j)
          l(i + n * j, a + n * b) = value;
        }
      }
    }
  }
  for (Index j = 0; j < n; ++j)
    for (Index b = 0; b < n; ++b) l(j + n * b, j + n * b) += model.dephasing(j, b);
  return l;
}

CorrelationMatrix brute_force_steady_state(const NetworkModel& model,
                                           const BruteForceOptions& options) {
  require_valid(model);
  const Index n = model.n_modes;
  if (n > options.max_modes) {
    throw SolverError(ErrorCode::invalid_argument,
                      "brute-force steady state limited to " + std::to_string(options.max_modes) +
                          " modes");
  }
  const Matrix l = lindblad_superoperator(model);
  Eigen::FullPivLU<Matrix> lu(l);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw SolverError(ErrorCode::singular_lindbladian,
                      "vectorized equation of motion is rank deficient (rank " +
                          std::to_string(lu.rank()) + " of " + std::to_string(n * n) + ")");
  }
  const Eigen::VectorXcd x = lu.solve(-vectorize(model.gamma_plus));
  Matrix c = unvectorize(x, n);
  c = 0.5 * (c + c.adjoint()).eval();
  return {std::move(c)};
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  const Index n = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  out << "t";
  for (Index i = 1; i <= n; ++i) out << ",n_" << i;
  out << ",residual\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out << trajectory.times[k];
    const Matrix& c = trajectory.states[k].values;
    for (Index i = 0; i < n; ++i) out << ',' << c(i, i).real();
    out << ',' << trajectory.residuals[k] << '\n';
  }
}

}  // namespace nesscorr
