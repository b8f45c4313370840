#pragma once

#include "nesscorr/types.hpp"

namespace nesscorr::linalg {

// Right eigenpairs of a general complex matrix (LAPACK zgeev); columns of
// `vectors` have unit 2-norm.
struct EigenPairs {
  Vector values;
  Matrix vectors;
};

EigenPairs general_eigen(const Matrix& a);

// Eigenvalues of a Hermitian / real symmetric matrix in ascending order.
// Diagonal inputs take a shortcut.
RealVector hermitian_eigenvalues(const Matrix& a);
RealVector symmetric_eigenvalues(const RealMatrix& a);

// Diagonally pivoted Cholesky of a Hermitian PSD matrix, a ~= L L^H.
// Stops once the largest remaining diagonal entry drops to
// rel_tol * (largest initial diagonal) or the rank reaches max_rank.
struct LowRankFactor {
  Matrix factor;      // n x rank
  double remainder;   // largest remaining diagonal at termination
  bool converged;
};

LowRankFactor pivoted_cholesky(const Matrix& a, double rel_tol, Index max_rank);

bool is_diagonal(const Matrix& a);
bool is_diagonal(const RealMatrix& a);

double max_abs(const Matrix& a);

}  // namespace nesscorr::linalg
