#include "nesscorr/model.hpp"

#include "nesscorr/error.hpp"
#include "nesscorr/linalg.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

namespace nesscorr {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kPsdTol = 1e-12;

template <typename M>
bool check_shape(const M& m, Index n, const char* name, std::vector<ModelViolation>& out) {
  if (m.rows() == n && m.cols() == n) return true;
  out.push_back({name, "shape",
                 static_cast<double>(std::max(std::abs(m.rows() - n), std::abs(m.cols() - n)))});
  return false;
}

template <typename M>
bool check_finite(const M& m, const char* name, std::vector<ModelViolation>& out) {
  if (m.allFinite()) return true;
  out.push_back({name, "finite", std::numeric_limits<double>::infinity()});
  return false;
}

// Relative Hermiticity defect max|A - A^H| / max|A|.
double hermitian_defect(const Matrix& a) {
  const double scale = linalg::max_abs(a);
  if (scale == 0.0) return 0.0;
  return linalg::max_abs(a - a.adjoint()) / scale;
}

double psd_defect(const RealVector& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  const double largest = eigenvalues.cwiseAbs().maxCoeff();
  const double smallest = eigenvalues.minCoeff();
  if (smallest >= -kPsdTol * largest) return 0.0;
  return -smallest;
}

void check_rates(const Matrix& m, const char* name, std::vector<ModelViolation>& out) {
  const double defect = hermitian_defect(m);
  if (defect > kHermitianTol) {
    out.push_back({name, "hermitian", defect});
    return;
  }
  const Matrix symmetrized = 0.5 * (m + m.adjoint());
  const double psd = psd_defect(linalg::hermitian_eigenvalues(symmetrized));
  if (psd > 0.0) out.push_back({name, "psd", psd});
}

}  // namespace

std::string ModelViolation::describe() const {
  std::ostringstream os;
  os << matrix << " not " << property << " (defect " << defect << ")";
  return os.str();
}

std::vector<ModelViolation> validate_model(const NetworkModel& model) {
  std::vector<ModelViolation> out;
  const Index n = model.n_modes;
  if (n < 1) {
    out.push_back({"n_modes", "positive", static_cast<double>(n)});
    return out;
  }
  bool ok = check_shape(model.hopping, n, "hopping", out);
  ok &= check_shape(model.gamma_plus, n, "gamma_plus", out);
  ok &= check_shape(model.gamma_minus, n, "gamma_minus", out);
  ok &= check_shape(model.dephasing, n, "dephasing", out);
  if (!ok) return out;
  ok = check_finite(model.hopping, "hopping", out);
  ok &= check_finite(model.gamma_plus, "gamma_plus", out);
  ok &= check_finite(model.gamma_minus, "gamma_minus", out);
  ok &= check_finite(model.dephasing, "dephasing", out);
  if (!ok) return out;

  if (const double defect = hermitian_defect(model.hopping); defect > kHermitianTol) {
    out.push_back({"hopping", "hermitian", defect});
  }
  check_rates(model.gamma_plus, "gamma_plus", out);
  check_rates(model.gamma_minus, "gamma_minus", out);

  const RealMatrix& s = model.dephasing;
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = scale == 0.0 ? 0.0 : (s - s.transpose()).cwiseAbs().maxCoeff() / scale;
  if (asym > kHermitianTol) {
    out.push_back({"dephasing", "symmetric", asym});
  } else {
    const RealMatrix symmetrized = 0.5 * (s + s.transpose());
    const double psd = psd_defect(linalg::symmetric_eigenvalues(symmetrized));
    if (psd > 0.0) out.push_back({"dephasing", "psd", psd});
  }
  return out;
}

void require_valid(const NetworkModel& model) {
  const auto violations = validate_model(model);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& v : violations) os << ' ' << v.describe() << ';';
  throw SolverError(ErrorCode::invalid_model, os.str());
}

Matrix long_range_hopping(Index n_sites, double v, double alpha) {
  Matrix h = Matrix::Zero(n_sites, n_sites);
  for (Index r = 1; r < n_sites; ++r) {
    const double amplitude = v / std::pow(static_cast<double>(r), alpha);
    for (Index i = 0; i + r < n_sites; ++i) {
      h(i, i + r) = amplitude;
      h(i + r, i) = amplitude;
    }
  }
  return h;
}

NetworkModel build_long_range_chain(const ChainParameters& p) {
  if (p.n_sites < 2) {
    throw SolverError(ErrorCode::invalid_argument, "long-range chain needs n_sites >= 2");
  }
  if (!(p.alpha > 0.0)) {
    throw SolverError(ErrorCode::invalid_argument, "long-range exponent alpha must be positive");
  }
  if (p.gamma_in < 0.0 || p.gamma_out < 0.0 || p.sigma < 0.0 || !std::isfinite(p.v)) {
    throw SolverError(ErrorCode::invalid_argument, "chain rates must be non-negative");
  }
  const Index n = p.n_sites;
  NetworkModel model;
  model.n_modes = n;
  model.hopping = long_range_hopping(n, p.v, p.alpha);
  model.gamma_plus = Matrix::Zero(n, n);
  model.gamma_minus = Matrix::Zero(n, n);
  model.gamma_plus(0, 0) = p.gamma_in;
  model.gamma_minus(n - 1, n - 1) = p.gamma_out;
  model.dephasing = p.sigma * RealMatrix::Identity(n, n);
  return model;
}

NetworkModel build_long_range_chain(Index n_sites, double v, double alpha, double gamma_in,
                                    double gamma_out, double sigma) {
  return build_long_range_chain(ChainParameters{n_sites, v, alpha, gamma_in, gamma_out, sigma});
}

std::string_view to_string(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::none: return "none";
    case PatternKind::onsite_all: return "onsite_all";
    case PatternKind::onsite_subset: return "onsite_subset";
    case PatternKind::general: return "general";
  }
  return "unknown";
}

std::vector<Index> DephasingPattern::support() const {
  std::vector<Index> sites;
  sites.reserve(indices.size() * 2);
  for (const auto& [m, mp] : indices) {
    sites.push_back(m);
    sites.push_back(mp);
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

DephasingPattern dephasing_pattern(const NetworkModel& model, double zero_tol) {
  DephasingPattern pattern;
  const RealMatrix& s = model.dephasing;
  bool diagonal = true;
  for (Index m = 0; m < s.rows(); ++m) {
    for (Index mp = 0; mp < s.cols(); ++mp) {
      if (std::abs(s(m, mp)) > zero_tol) {
        pattern.indices.emplace_back(m, mp);
        diagonal &= (m == mp);
      }
    }
  }
  pattern.n_sigma = static_cast<Index>(pattern.indices.size());
  if (pattern.n_sigma == 0) {
    pattern.kind = PatternKind::none;
  } else if (!diagonal) {
    pattern.kind = PatternKind::general;
  } else if (pattern.n_sigma == model.n_modes) {
    pattern.kind = PatternKind::onsite_all;
  } else {
    pattern.kind = PatternKind::onsite_subset;
  }
  return pattern;
}

}  // namespace nesscorr
