#include "nesscorr/linalg.hpp"

#include "nesscorr/error.hpp"
#include "nesscorr/parallel.hpp"

#include <complex>
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <cstdlib>
#include <string>

namespace nesscorr {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("NESSCORR_WORKERS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) return static_cast<std::size_t>(parsed);
  }
  return 1;
}

namespace linalg {

EigenPairs general_eigen(const Matrix& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  EigenPairs out{Vector(a.rows()), Matrix(a.rows(), a.rows())};
  if (n == 0) return out;
  Matrix work = a;
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n,
                                        out.values.data(), nullptr, n, out.vectors.data(), n);
  if (info != 0) {
    throw SolverError(ErrorCode::non_diagonalizable,
                      "zgeev failed to converge (info=" + std::to_string(info) + ")");
  }
  return out;
}

RealVector hermitian_eigenvalues(const Matrix& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (is_diagonal(a)) {
    RealVector d = a.diagonal().real();
    std::sort(d.begin(), d.end());
    return d;
  }
  Matrix work = a;
  RealVector w(a.rows());
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data());
  if (info != 0) {
    throw SolverError(ErrorCode::non_diagonalizable,
                      "zheevd failed (info=" + std::to_string(info) + ")");
  }
  return w;
}

RealVector symmetric_eigenvalues(const RealMatrix& a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (is_diagonal(a)) {
    RealVector d = a.diagonal();
    std::sort(d.begin(), d.end());
    return d;
  }
  RealMatrix work = a;
  RealVector w(a.rows());
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data());
  if (info != 0) {
    throw SolverError(ErrorCode::non_diagonalizable,
                      "dsyevd failed (info=" + std::to_string(info) + ")");
  }
  return w;
}

LowRankFactor pivoted_cholesky(const Matrix& a, double rel_tol, Index max_rank) {
  const Index n = a.rows();
  max_rank = std::min(max_rank, n);
  RealVector diag = a.diagonal().real();
  const double scale = n > 0 ? diag.maxCoeff() : 0.0;
  Matrix factor(n, max_rank);
  Index rank = 0;
  double remainder = scale;
  while (rank < max_rank) {
    Index pivot = 0;
    remainder = diag.maxCoeff(&pivot);
    if (remainder <= rel_tol * scale || remainder <= 0.0) break;
    // Column `pivot` of the current Schur complement.
    Vector column = a.col(pivot);
    if (rank > 0) {
      column.noalias() -= factor.leftCols(rank) * factor.row(pivot).head(rank).adjoint();
    }
    const double root = std::sqrt(remainder);
    factor.col(rank) = column / root;
    for (Index i = 0; i < n; ++i) diag(i) -= std::norm(factor(i, rank));
    diag(pivot) = 0.0;
    ++rank;
  }
  if (rank == max_rank && n > 0) remainder = diag.maxCoeff();
  const bool converged = remainder <= rel_tol * scale || remainder <= 0.0;
  return {factor.leftCols(rank), remainder, converged};
}

bool is_diagonal(const Matrix& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != Complex(0.0)) return false;
  return true;
}

bool is_diagonal(const RealMatrix& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != 0.0) return false;
  return true;
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace linalg
}  // namespace nesscorr
