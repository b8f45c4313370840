#include "nesscorr/spectral.hpp"

#include "nesscorr/error.hpp"
#include "nesscorr/linalg.hpp"

#include <iostream>
#include <sstream>

namespace nesscorr {

EffectiveHamiltonian effective_hamiltonian(const NetworkModel& model) {
  Matrix h = -kI * model.hopping - 0.5 * (model.gamma_plus + model.gamma_minus);
  h.diagonal() -= 0.5 * model.dephasing.diagonal().cast<Complex>();
  return {std::move(h)};
}

SpectralData decompose(const EffectiveHamiltonian& h_eff, double stability_tol) {
  DecomposeOptions options;
  options.stability_tol = stability_tol;
  return decompose(h_eff, options);
}

SpectralData decompose(const EffectiveHamiltonian& h_eff, const DecomposeOptions& options) {
  const Matrix& h = h_eff.matrix;
  const Index n = h.rows();
  SpectralData out;
  if (n == 0) return out;

  auto eig = linalg::general_eigen(h);
  out.eigenvalues = std::move(eig.values);
  out.right_vectors = std::move(eig.vectors);
  const Matrix& v = out.right_vectors;

  Eigen::PartialPivLU<Matrix> lu(v);
  const Matrix v_inv = lu.inverse();
  out.left_vectors = v_inv.adjoint();
  out.condition_number = v.cwiseAbs().colwise().sum().maxCoeff() *
                         v_inv.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(out.condition_number)) {
    throw SolverError(ErrorCode::non_diagonalizable, "eigenvector matrix is singular");
  }
  if (out.condition_number > options.warn_condition) {
    std::clog << "nesscorr: warning: eigenvector condition number " << out.condition_number
              << " exceeds " << options.warn_condition << '\n';
  }

  const double h_norm = h.norm();
  Matrix residual = h * v;
  residual -= v * out.eigenvalues.asDiagonal();
  out.eigen_residual = h_norm > 0.0 ? residual.norm() / h_norm : residual.norm();
  Matrix rebuilt = v * out.eigenvalues.asDiagonal() * v_inv;
  rebuilt -= h;
  out.reconstruction_error = h_norm > 0.0 ? rebuilt.norm() / h_norm : rebuilt.norm();
  if (out.eigen_residual > options.residual_tol || out.reconstruction_error > options.residual_tol) {
    std::ostringstream os;
    os << "eigen residual " << out.eigen_residual << " / reconstruction error "
       << out.reconstruction_error << " exceed " << options.residual_tol
       << " (defective or ill-conditioned eigenbasis)";
    throw SolverError(ErrorCode::non_diagonalizable, os.str());
  }
  Matrix gram = v_inv * v;
  gram.diagonal().array() -= 1.0;
  out.biorthogonality_error = linalg::max_abs(gram);
  if (out.biorthogonality_error > options.biorthogonality_tol) {
    std::ostringstream os;
    os << "left/right eigenvectors not biorthonormal (defect " << out.biorthogonality_error
       << ")";
    throw SolverError(ErrorCode::non_diagonalizable, os.str());
  }

  const double lambda_scale = out.eigenvalues.cwiseAbs().maxCoeff();
  const double tol = options.stability_tol >= 0.0 ? options.stability_tol : 1e-12 * lambda_scale;
  out.delta.resize(n, n);
  for (Index q = 0; q < n; ++q) {
    for (Index p = 0; p < n; ++p) {
      const Complex denom = out.eigenvalues(p) + std::conj(out.eigenvalues(q));
      if (std::abs(denom) <= tol || !(denom.real() < 0.0)) {
        std::ostringstream os;
        os << "eigenvalue pair (" << p << ", " << q << ") is not dissipative: |lambda_p + "
           << "conj(lambda_q)| = " << std::abs(denom);
        throw SolverError(ErrorCode::non_dissipative_pair, os.str());
      }
      out.delta(p, q) = -1.0 / denom;
    }
  }
  return out;
}

}  // namespace nesscorr
