#pragma once

#include "nesscorr/model.hpp"
#include "nesscorr/steady_state.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nesscorr {

/// Least-squares fit of log R against log N.
struct ScalingFit {
  double nu = 0.0;
  double intercept = 0.0;
  double nu_stderr = 0.0;      // from the fit covariance
  double residual_rms = 0.0;   // s = sqrt(sum eps^2 / (q - 2)) of the log residuals
  Index q = 0;
  std::pair<double, double> window{0.0, 0.0};  // (N_min, N_max)
};

ScalingFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& resistances);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
  double alpha_c = 0.0;  // where the line reaches nu = 1
};

/// nu(alpha) fitted below alpha_max_fit.
///   constrained: nu = kappa * alpha - 2, alpha_c = 3 / kappa
///   free:        nu = slope * alpha + intercept, alpha_c = (1 - intercept) / slope
struct CriticalPointEstimate {
  double kappa = 0.0;
  double kappa_err = 0.0;          // standard error from the fit covariance
  double kappa_scatter = 0.0;      // residual RMS of nu about the constrained line
  double alpha_c = 0.0;
  std::pair<double, double> alpha_window{0.0, 0.0};
  Index points = 0;
  LineFit free_intercept;
};

CriticalPointEstimate fit_nu_of_alpha(const std::vector<double>& alphas,
                                      const std::vector<double>& nus, double alpha_max_fit = 1.5);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepPlan {
  std::vector<double> alphas;
  std::vector<Index> sizes;
};

struct SweepPoint {
  double alpha = 0.0;
  Index n_sites = 0;
  double current = 0.0;
  double resistance = 0.0;
  double wall_seconds = 0.0;
  std::string status = "ok";  // "ok" or the error name and message

  bool ok() const noexcept { return status == "ok"; }
};

struct SweepOptions {
  std::optional<std::filesystem::path> output;  // incremental CSV
  bool resume = false;                          // skip (alpha, N) rows already in output
  std::size_t workers = 1;                      // grid points solved concurrently
  SteadyStateOptions solver{};
  // Called after each finished point, from the worker that solved it.
  std::function<void(const SweepPoint&)> on_point;
};

// Chain parameters other than n_sites and alpha are taken from `chain`.
// Per-point failures are recorded in the status column; the sweep continues.
// The returned table, and the output file once the sweep finishes, are sorted
// by (alpha, N).
std::vector<SweepPoint> sweep(const SweepPlan& plan, const ChainParameters& chain,
                              const SweepOptions& options = {});

// alpha in [1.0, 2.0] step 0.05; N in {512, 645, 813, 1024} (factor 2^(1/3)).
SweepPlan small_system_preset();
// Same alpha grid, N in {7500, 8250, 9000}. Long-running.
SweepPlan large_system_preset();
std::vector<double> alpha_grid(double start, double stop, double step);

std::vector<SweepPoint> read_sweep_csv(const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepPoint>& rows, const std::filesystem::path& path);
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepPoint& row);

// Groups successful rows by alpha and fits each group whose sizes lie in
// [n_min, n_max]; groups with fewer than three points carry the error text.
struct AlphaFit {
  double alpha = 0.0;
  std::optional<ScalingFit> fit;
  std::string error;
};

std::vector<AlphaFit> fit_sweep(const std::vector<SweepPoint>& rows, double n_min = 0.0,
                                double n_max = 1e300);

}  // namespace nesscorr
