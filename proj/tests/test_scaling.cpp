#include "nesscorr/error.hpp"
#include "nesscorr/scaling.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace nesscorr;

namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const SolverError& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(path);
  return path;
}

ChainParameters chain(double sigma) {
  ChainParameters c;
  c.sigma = sigma;
  return c;
}

}  // namespace

TEST_CASE("exact power laws are recovered") {
  const std::vector<double> sizes{100, 200, 400, 800};
  for (const double nu : {1.0, 0.5, 0.123}) {
    std::vector<double> r;
    for (const double n : sizes) r.push_back(3.7 * std::pow(n, nu));
    const auto fit = fit_power_law(sizes, r);
    CHECK(fit.nu == doctest::Approx(nu).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(std::log(3.7)).epsilon(1e-12));
    CHECK(fit.residual_rms < 1e-13);
    CHECK(fit.q == 4);
    CHECK(fit.window == std::pair{100.0, 800.0});
  }
}

TEST_CASE("power-law residual scatter uses q - 2 degrees of freedom") {
  const std::vector<double> sizes{1.0, std::exp(1.0), std::exp(2.0)};
  const std::vector<double> r{1.0, std::exp(2.0), std::exp(2.0)};
  // log R = 0, 2, 2 against log N = 0, 1, 2: slope 1, residuals (-1/3, 2/3, -1/3).
  const auto fit = fit_power_law(sizes, r);
  CHECK(fit.nu == doctest::Approx(1.0));
  CHECK(fit.residual_rms == doctest::Approx(std::sqrt(6.0 / 9.0)));
  CHECK(fit.nu_stderr == doctest::Approx(std::sqrt(6.0 / 9.0) / std::sqrt(2.0)));
}

TEST_CASE("power-law fit preconditions") {
  CHECK(error_of([] { fit_power_law({1, 2}, {1, 2}); }) == ErrorCode::insufficient_points);
  CHECK(error_of([] { fit_power_law({1, 2, 3}, {1, 0, 2}); }) == ErrorCode::nonpositive_resistance);
  CHECK(error_of([] { fit_power_law({2, 2, 2}, {1, 2, 3}); }) == ErrorCode::insufficient_points);
}

TEST_CASE("critical point of the thermodynamic-limit line") {
  std::vector<double> alphas, nus;
  for (double a = 1.0; a < 2.0; a += 0.05) {
    alphas.push_back(a);
    nus.push_back(2.0 * a - 2.0);
  }
  const auto est = fit_nu_of_alpha(alphas, nus);
  CHECK(est.kappa == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(est.alpha_c == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(est.kappa_err < 1e-13);
  CHECK(est.free_intercept.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(est.free_intercept.intercept == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(est.free_intercept.alpha_c == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(est.points == 10);
  CHECK(est.alpha_window.second < 1.5);
}

TEST_CASE("free-intercept critical point differs from the constrained one") {
  const std::vector<double> alphas{1.0, 1.1, 1.2, 1.3, 1.4};
  std::vector<double> nus;
  for (const double a : alphas) nus.push_back(1.58 * a - 1.48);
  const auto est = fit_nu_of_alpha(alphas, nus);
  CHECK(est.free_intercept.slope == doctest::Approx(1.58));
  CHECK(est.free_intercept.alpha_c == doctest::Approx(2.48 / 1.58));
  CHECK(est.alpha_c == doctest::Approx(3.0 / est.kappa));
  CHECK(est.kappa_scatter > 0.0);
}

TEST_CASE("critical-point fit needs three points below the cut") {
  CHECK(error_of([] { fit_nu_of_alpha({1.0, 1.2, 1.6, 1.8}, {0, 0.4, 1, 1}); }) ==
        ErrorCode::insufficient_points);
}

TEST_CASE("alpha grid and presets") {
  const auto grid = alpha_grid(1.0, 2.0, 0.05);
  REQUIRE(grid.size() == 21);
  CHECK(grid.front() == 1.0);
  CHECK(grid[7] == 1.35);
  CHECK(grid.back() == 2.0);
  const auto small = small_system_preset();
  CHECK(small.alphas == grid);
  CHECK(small.sizes == std::vector<Index>{512, 645, 813, 1024});
  CHECK(large_system_preset().sizes == std::vector<Index>{7500, 8250, 9000});
}

TEST_CASE("empty grid gives an empty table") {
  CHECK(sweep(SweepPlan{}, chain(10.0), SweepOptions{}).empty());
}

TEST_CASE("sweep table is canonical, resumable and deterministic") {
  const auto path = temp_file("nesscorr_sweep_test.csv");
  const SweepPlan plan{{1.5, 1.0}, {24, 16, 20}};
  SweepOptions options;
  options.output = path;
  options.workers = 3;
  std::atomic<int> computed = 0;
  options.on_point = [&](const SweepPoint&) { ++computed; };
  const auto rows = sweep(plan, chain(100.0), options);
  CHECK(computed == 6);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].alpha == 1.0);
  CHECK(rows[0].n_sites == 16);
  CHECK(rows[5].alpha == 1.5);
  CHECK(rows[5].n_sites == 24);
  for (const auto& r : rows) {
    CHECK(r.ok());
    CHECK(r.resistance == doctest::Approx(1.0 / r.current));
  }

  const auto stored = read_sweep_csv(path);
  REQUIRE(stored.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(stored[i].current == rows[i].current);
    CHECK(stored[i].resistance == rows[i].resistance);
  }

  computed = 0;
  options.resume = true;
  const auto resumed = sweep(plan, chain(100.0), options);
  CHECK(computed == 0);
  CHECK(resumed.size() == 6);

  SweepOptions serial;
  const auto again = sweep(plan, chain(100.0), serial);
  for (std::size_t i = 0; i < 6; ++i) CHECK(again[i].current == rows[i].current);

  const auto fits = fit_sweep(rows, 0, 1e9);
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].fit.has_value());
  CHECK(fits[0].fit->q == 3);
  std::filesystem::remove(path);
}

TEST_CASE("resume extends a partial table") {
  const auto path = temp_file("nesscorr_sweep_partial.csv");
  SweepOptions options;
  options.output = path;
  sweep(SweepPlan{{1.2}, {12}}, chain(10.0), options);
  options.resume = true;
  int computed = 0;
  options.on_point = [&](const SweepPoint&) { ++computed; };
  const auto rows = sweep(SweepPlan{{1.2}, {12, 14}}, chain(10.0), options);
  CHECK(computed == 1);
  CHECK(rows.size() == 2);
  CHECK(read_sweep_csv(path).size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("per-point failures are recorded and the sweep continues") {
  const auto rows = sweep(SweepPlan{{-1.0, 1.5}, {8}}, chain(1.0), SweepOptions{});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].ok());
  CHECK(rows[0].status.find("InvalidArgument") == 0);
  CHECK(rows[1].ok());
  const auto fits = fit_sweep(rows, 0, 1e9);
  REQUIRE(fits.size() == 2);
  CHECK_FALSE(fits[0].fit.has_value());
  CHECK_FALSE(fits[1].fit.has_value());
  CHECK(fits[1].error.find("InsufficientPoints") == 0);
}

TEST_CASE("sweep rows keep full precision") {
  SweepPoint p;
  p.alpha = 1.35;
  p.n_sites = 645;
  p.current = 1.0 / 3.0;
  p.resistance = 3.0000000000000004;
  p.wall_seconds = 0.1;
  p.status = "a,b";
  const auto path = temp_file("nesscorr_row.csv");
  write_sweep_csv({p}, path);
  const auto back = read_sweep_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].alpha == p.alpha);
  CHECK(back[0].current == p.current);
  CHECK(back[0].resistance == p.resistance);
  CHECK(back[0].status == "a;b");
  CHECK(sweep_csv_header() == "alpha,n_sites,current,resistance,wall_seconds,status");
  std::filesystem::remove(path);
}
