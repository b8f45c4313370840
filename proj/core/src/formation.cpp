#include "nesscorr/error.hpp"
#include "nesscorr/linalg.hpp"
#include "nesscorr/steady_state.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace nesscorr {

namespace {

// Rows of V and W restricted to the pattern support, plus site -> row lookup.
struct SupportView {
  std::vector<Index> sites;
  std::vector<Index> position;  // N entries, -1 off support
  Matrix v_rows;                // |S| x N
  Matrix w_rows;                // |S| x N
};

SupportView make_support(const SpectralData& spec, const DephasingPattern& pattern) {
  SupportView s;
  s.sites = pattern.support();
  const Index n = spec.size();
  s.position.assign(static_cast<std::size_t>(n), -1);
  s.v_rows.resize(static_cast<Index>(s.sites.size()), n);
  s.w_rows.resize(static_cast<Index>(s.sites.size()), n);
  for (std::size_t k = 0; k < s.sites.size(); ++k) {
    const Index site = s.sites[k];
    s.position[static_cast<std::size_t>(site)] = static_cast<Index>(k);
    s.v_rows.row(static_cast<Index>(k)) = spec.right_vectors.row(site);
    s.w_rows.row(static_cast<Index>(k)) = spec.left_vectors.row(site);
  }
  return s;
}

Index pos(const SupportView& s, Index site) { return s.position[static_cast<std::size_t>(site)]; }

// Onsite patterns: column j is site m, output row i is site o,
//   d_ij = sigma_m sum_pq X_op Delta_pq conj(X_oq),  X_op = V_op conj(W_mp).
void per_element_diagonal(const SpectralData& spec, const NetworkModel& model,
                          const DephasingPattern& pattern, const SupportView& s,
                          const ParallelOptions& parallel, Matrix& d) {
  parallel_for(static_cast<std::size_t>(pattern.n_sigma), parallel, [&](std::size_t j) {
    const Index m = pattern.indices[j].first;
    const Eigen::RowVectorXcd u = spec.left_vectors.row(m).conjugate();
    const Matrix x = s.v_rows * u.asDiagonal();
    const Matrix z = x * spec.delta;
    const double sigma = model.dephasing(m, m);
    for (Index i = 0; i < pattern.n_sigma; ++i) {
      const Index o = pos(s, pattern.indices[static_cast<std::size_t>(i)].first);
      d(i, static_cast<Index>(j)) = sigma * x.row(o).dot(z.row(o));
    }
  });
}

// General patterns, grouped by the first index m of the input pair so the
// product X_m Delta is shared by every (m, m').
void per_element_general(const SpectralData& spec, const NetworkModel& model,
                         const DephasingPattern& pattern, const SupportView& s,
                         const ParallelOptions& parallel, Matrix& d) {
  std::vector<std::vector<Index>> columns_by_row(s.sites.size());
  for (Index j = 0; j < pattern.n_sigma; ++j) {
    const Index m = pattern.indices[static_cast<std::size_t>(j)].first;
    columns_by_row[static_cast<std::size_t>(pos(s, m))].push_back(j);
  }
  parallel_for(s.sites.size(), parallel, [&](std::size_t g) {
    if (columns_by_row[g].empty()) return;
    const Index m = s.sites[g];
    const Eigen::RowVectorXcd u = spec.left_vectors.row(m).conjugate();
    const Matrix z = (s.v_rows * u.asDiagonal()) * spec.delta;
    for (const Index j : columns_by_row[g]) {
      const Index mp = pattern.indices[static_cast<std::size_t>(j)].second;
      const double sigma = model.dephasing(m, mp);
      // E_{o o'} = sum_q Z_oq W_{m'q} conj(V_{o'q})
      const Matrix e = (z * spec.left_vectors.row(mp).transpose().asDiagonal()) * s.v_rows.adjoint();
      for (Index i = 0; i < pattern.n_sigma; ++i) {
        const auto& [o, op] = pattern.indices[static_cast<std::size_t>(i)];
        d(i, j) = sigma * e(pos(s, o), pos(s, op));
      }
    }
  });
}

// Full column of the superoperator for every input pair, V X V^H with
// X = Delta o (W^H |m><m'| W), then restricted to the output pairs.
void via_full(const SpectralData& spec, const NetworkModel& model, const DephasingPattern& pattern,
              const ParallelOptions& parallel, Matrix& d) {
  const Matrix& v = spec.right_vectors;
  parallel_for(static_cast<std::size_t>(pattern.n_sigma), parallel, [&](std::size_t j) {
    const auto& [m, mp] = pattern.indices[j];
    const Vector u = spec.left_vectors.row(m).adjoint();
    const Vector up = spec.left_vectors.row(mp).adjoint();
    const Matrix x = spec.delta.cwiseProduct(u * up.adjoint());
    const Matrix full = v * x * v.adjoint();
    const double sigma = model.dephasing(m, mp);
    for (Index i = 0; i < pattern.n_sigma; ++i) {
      const auto& [o, op] = pattern.indices[static_cast<std::size_t>(i)];
      d(i, static_cast<Index>(j)) = sigma * full(o, op);
    }
  });
}

// Delta = sum_k l_k l_k^H gives M_k = V_S diag(l_k) W_S^H and
//   d_ij = sigma_{m m'} sum_k M_k(o, m) conj(M_k(o', m')).
// The k loop is sequential, so the summation order does not depend on workers.
void factored(const NetworkModel& model, const DephasingPattern& pattern, const SupportView& s,
              const Matrix& factor, const ParallelOptions& parallel, Matrix& d) {
  const Index size = static_cast<Index>(s.sites.size());
  const Matrix w_adj = s.w_rows.adjoint();  // N x |S|
  // Fixed block width keeps every GEMM shape, and so its rounding, independent of
  // the worker count.
  constexpr Index block = 64;
  const auto blocks = static_cast<std::size_t>((size + block - 1) / block);
  Matrix mk(size, size);
  Matrix a(size, s.v_rows.cols());
  d.setZero();
  for (Index k = 0; k < factor.cols(); ++k) {
    a = s.v_rows * factor.col(k).asDiagonal();
    parallel_for(blocks, parallel, [&](std::size_t w) {
      const Index begin = static_cast<Index>(w) * block;
      const Index count = std::min(size, begin + block) - begin;
      if (count > 0) mk.middleCols(begin, count).noalias() = a * w_adj.middleCols(begin, count);
    });
    if (pattern.diagonal_only()) {
      parallel_for(static_cast<std::size_t>(pattern.n_sigma), parallel, [&](std::size_t j) {
        const Index col = pos(s, pattern.indices[j].first);
        for (Index i = 0; i < pattern.n_sigma; ++i) {
          const Index o = pos(s, pattern.indices[static_cast<std::size_t>(i)].first);
          d(i, static_cast<Index>(j)) += std::norm(mk(o, col));
        }
      });
    } else {
      parallel_for(static_cast<std::size_t>(pattern.n_sigma), parallel, [&](std::size_t j) {
        const Index m = pos(s, pattern.indices[j].first);
        const Index mp = pos(s, pattern.indices[j].second);
        for (Index i = 0; i < pattern.n_sigma; ++i) {
          const auto& [o, op] = pattern.indices[static_cast<std::size_t>(i)];
          d(i, static_cast<Index>(j)) += mk(pos(s, o), m) * std::conj(mk(pos(s, op), mp));
        }
      });
    }
  }
  for (Index j = 0; j < pattern.n_sigma; ++j) {
    const auto& [m, mp] = pattern.indices[static_cast<std::size_t>(j)];
    d.col(j) *= model.dephasing(m, mp);
  }
}

}  // namespace

std::string_view to_string(StrategyTag tag) noexcept {
  switch (tag) {
    case StrategyTag::lyapunov_only: return "lyapunov_only";
    case StrategyTag::restricted_per_element: return "restricted_per_element";
    case StrategyTag::restricted_via_full: return "restricted_via_full";
    case StrategyTag::full_vectorized: return "full_vectorized";
  }
  return "unknown";
}

std::string_view to_string(FormationKernel kernel) noexcept {
  switch (kernel) {
    case FormationKernel::automatic: return "automatic";
    case FormationKernel::direct: return "direct";
    case FormationKernel::factored: return "factored";
  }
  return "unknown";
}

double predicted_cost(double n, double ns) {
  return std::max({std::min(ns * ns * n * n, std::pow(n, 5)), ns * ns * ns, n * n * n});
}

SolveStrategy choose_strategy(Index n_modes, const DephasingPattern& pattern) {
  const auto n = static_cast<double>(n_modes);
  const auto ns = static_cast<double>(pattern.n_sigma);
  SolveStrategy s;
  s.predicted_cost = predicted_cost(n, ns);
  if (pattern.n_sigma == 0) {
    s.tag = StrategyTag::lyapunov_only;
  } else if (ns * ns < n * n * n) {
    s.tag = StrategyTag::restricted_per_element;
  } else {
    s.tag = StrategyTag::restricted_via_full;
  }
  return s;
}

RestrictedSuperoperator form_restricted_superoperator(const SpectralData& spec,
                                                      const NetworkModel& model,
                                                      const DephasingPattern& pattern,
                                                      const FormationOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Index n = spec.size();
  const Index ns = pattern.n_sigma;
  if (ns == 0) {
    throw SolverError(ErrorCode::invalid_argument, "no dephasing entries to form a superoperator for");
  }
  const double bytes = static_cast<double>(ns) * static_cast<double>(ns) * sizeof(Complex);
  if (bytes > static_cast<double>(options.memory_budget_bytes)) {
    std::ostringstream os;
    os << "restricted superoperator needs " << bytes << " bytes, budget is "
       << options.memory_budget_bytes;
    throw SolverError(ErrorCode::memory_budget_exceeded, os.str());
  }

  RestrictedSuperoperator out;
  out.pattern = pattern;
  out.info.tag = options.force_tag.value_or(choose_strategy(n, pattern).tag);
  if (out.info.tag == StrategyTag::lyapunov_only || out.info.tag == StrategyTag::full_vectorized) {
    throw SolverError(ErrorCode::invalid_argument,
                      std::string("strategy ") + std::string(to_string(out.info.tag)) +
                          " does not form a restricted superoperator");
  }
  out.entries.resize(ns, ns);

  const SupportView support = make_support(spec, pattern);
  std::optional<linalg::LowRankFactor> factor;
  if (options.kernel != FormationKernel::direct) {
    const Index max_rank =
        options.kernel == FormationKernel::factored
            ? n
            : std::max<Index>(1, static_cast<Index>(options.max_factor_fraction * static_cast<double>(n)));
    factor = linalg::pivoted_cholesky(spec.delta, options.factor_tolerance, max_rank);
    if (options.kernel == FormationKernel::automatic && !factor->converged) factor.reset();
  }

  if (factor) {
    out.info.kernel = FormationKernel::factored;
    out.info.factor_rank = factor->factor.cols();
    factored(model, pattern, support, factor->factor, options.parallel, out.entries);
  } else {
    out.info.kernel = FormationKernel::direct;
    if (out.info.tag == StrategyTag::restricted_via_full) {
      via_full(spec, model, pattern, options.parallel, out.entries);
    } else if (pattern.diagonal_only()) {
      per_element_diagonal(spec, model, pattern, support, options.parallel, out.entries);
    } else {
      per_element_general(spec, model, pattern, support, options.parallel, out.entries);
    }
  }
  out.info.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace nesscorr
