#pragma once

#include "nesscorr/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nesscorr {

/// Quadratic fermionic network with Markovian injection/depletion and
/// generalized (cross-term) dephasing. All rates are in units of the hopping
/// scale, hbar = 1.
struct NetworkModel {
  Index n_modes = 0;
  Matrix hopping;       // Hermitian single-particle hopping matrix
  Matrix gamma_plus;    // injection rates, Hermitian PSD
  Matrix gamma_minus;   // depletion rates, Hermitian PSD
  RealMatrix dephasing; // real symmetric PSD

  Matrix gamma() const { return gamma_plus + gamma_minus; }
};

struct ModelViolation {
  std::string matrix;    // "hopping", "gamma_plus", ...
  std::string property;  // "hermitian", "psd", "shape", ...
  double defect = 0.0;   // measured magnitude of the failure

  std::string describe() const;
};

// Empty iff every matrix has shape n_modes x n_modes, hopping is Hermitian,
// gamma_plus/gamma_minus are Hermitian PSD and dephasing is symmetric PSD.
std::vector<ModelViolation> validate_model(const NetworkModel& model);

// Throws SolverError(invalid_model) listing every violation.
void require_valid(const NetworkModel& model);

struct ChainParameters {
  Index n_sites = 2;
  double v = 1.0;
  double alpha = 1.5;
  double gamma_in = 1.0;
  double gamma_out = 1.0;
  double sigma = 0.0;
};

/// Boundary-driven chain with hopping v / r^alpha between every pair of sites
/// at distance r, injection on the first site, depletion on the last one and
/// uniform onsite dephasing.
NetworkModel build_long_range_chain(const ChainParameters& params);
NetworkModel build_long_range_chain(Index n_sites, double v, double alpha, double gamma_in,
                                    double gamma_out, double sigma);

// Hopping block only, shared with the config loader.
Matrix long_range_hopping(Index n_sites, double v, double alpha);

enum class PatternKind { none, onsite_all, onsite_subset, general };

std::string_view to_string(PatternKind kind) noexcept;

/// Nonzero entries of the dephasing matrix, sorted by (row, column).
struct DephasingPattern {
  std::vector<std::pair<Index, Index>> indices;
  Index n_sigma = 0;
  PatternKind kind = PatternKind::none;

  bool diagonal_only() const noexcept {
    return kind == PatternKind::onsite_all || kind == PatternKind::onsite_subset;
  }
  // Sorted distinct mode indices touched by the pattern.
  std::vector<Index> support() const;
};

DephasingPattern dephasing_pattern(const NetworkModel& model, double zero_tol = 0.0);

}  // namespace nesscorr
