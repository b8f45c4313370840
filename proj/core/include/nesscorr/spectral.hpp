#pragma once

#include "nesscorr/model.hpp"
#include "nesscorr/types.hpp"

#include <string_view>

namespace nesscorr {

// Version tag of the propagator / Delta sign convention. Stored alongside every
// result so outputs produced under different conventions are never mixed.
//
// The effective Hamiltonian is used as the generator of the damped evolution,
// exp(H_eff t), and the stationary correlation matrix solves
//   H_eff C + C H_eff^H + source = 0.
// With right eigenvectors V, left vectors W (W^H V = 1) and eigenvalues lambda,
//   C = V [Delta o (W^H source W)] V^H,   Delta_pq = -1 / (lambda_p + conj(lambda_q)),
// so Delta is the Gram matrix of the decaying modes: Hermitian and PSD.
inline constexpr std::string_view kConventionVersion = "exp(Ht)-gram-delta/1";

struct EffectiveHamiltonian {
  Matrix matrix;
};

// H_eff = -i*hopping - (gamma_plus + gamma_minus)/2 - diag(dephasing)/2.
EffectiveHamiltonian effective_hamiltonian(const NetworkModel& model);

struct SpectralData {
  Vector eigenvalues;
  Matrix right_vectors;  // V, eigenvectors as columns
  Matrix left_vectors;   // W, so that W^H V = 1
  Matrix delta;          // Delta_pq = -1 / (lambda_p + conj(lambda_q))
  double condition_number = 1.0;  // 1-norm condition of V
  double eigen_residual = 0.0;        // ||H V - V diag(lambda)|| / ||H||
  double reconstruction_error = 0.0;  // ||V diag(lambda) W^H - H|| / ||H||
  double biorthogonality_error = 0.0;

  Index size() const noexcept { return eigenvalues.size(); }
};

struct DecomposeOptions {
  // Pairs with |lambda_p + conj(lambda_q)| <= stability_tol are rejected.
  // Negative means 1e-12 * max|lambda|.
  double stability_tol = -1.0;
  double residual_tol = 1e-10;
  double biorthogonality_tol = 1e-10;
  double warn_condition = 1e8;
};

SpectralData decompose(const EffectiveHamiltonian& h_eff, const DecomposeOptions& options = {});
SpectralData decompose(const EffectiveHamiltonian& h_eff, double stability_tol);

}  // namespace nesscorr
