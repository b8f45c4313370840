#include "nesscorr/error.hpp"
#include "nesscorr/observables.hpp"
#include "nesscorr/steady_state.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace nesscorr;

namespace {

NetworkModel single_site(double gp, double gm) {
  NetworkModel m;
  m.n_modes = 1;
  m.hopping = Matrix::Zero(1, 1);
  m.gamma_plus = Matrix::Constant(1, 1, gp);
  m.gamma_minus = Matrix::Constant(1, 1, gm);
  m.dephasing = RealMatrix::Zero(1, 1);
  return m;
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const SolverError& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

// Injection on the last site and depletion on the first.
NetworkModel reversed(NetworkModel m) {
  const Index n = m.n_modes;
  std::swap(m.gamma_plus(0, 0), m.gamma_plus(n - 1, n - 1));
  std::swap(m.gamma_minus(0, 0), m.gamma_minus(n - 1, n - 1));
  return m;
}

}  // namespace

TEST_CASE("half-filled occupations") {
  const RealVector n = occupations(CorrelationMatrix{0.5 * Matrix::Identity(4, 4)});
  CHECK((n.array() == 0.5).all());
}

TEST_CASE("single site terminal balance") {
  const auto model = single_site(0.3, 0.9);
  const auto c = steady_state(model);
  CHECK(occupations(c)(0) == doctest::Approx(0.25));
  // Terminal supports overlap on a single site.
  CHECK(error_of([&] { terminal_currents(c, model); }) == ErrorCode::not_boundary_driven);
}

TEST_CASE("terminal currents of the empty state") {
  const auto model = build_long_range_chain(4, 1.0, 1.5, 0.6, 0.8, 0.0);
  const auto [in, out] = terminal_currents(CorrelationMatrix{Matrix::Zero(4, 4)}, model);
  CHECK(in == doctest::Approx(0.6));
  CHECK(out == 0.0);
}

TEST_CASE("chain steady state conserves current through every cut") {
  for (const double sigma : {0.0, 1.0, 50.0}) {
    const auto model = build_long_range_chain(6, 1.0, 1.2, 1.0, 0.7, sigma);
    const auto report = transport_report(steady_state(model), model);
    CHECK(report.terminal_in > 0.0);
    CHECK(std::abs(report.terminal_in - report.terminal_out) <= 1e-10 * report.terminal_in);
    REQUIRE(report.cut_currents.size() == 5);
    for (Index k = 0; k < 5; ++k) {
      CHECK(std::abs(report.cut_currents(k) - report.terminal_in) <= 1e-10 * report.terminal_in);
    }
    CHECK(continuity_defect(report) <= 1e-10);
    CHECK(report.resistance == doctest::Approx(1.0 / report.terminal_in));
  }
}

TEST_CASE("real correlations carry no current") {
  const auto model = build_long_range_chain(5, 1.0, 1.0, 1.0, 1.0, 0.0);
  Matrix c = Matrix::Constant(5, 5, 0.1);
  c.diagonal().setConstant(0.5);
  CHECK(cut_currents(CorrelationMatrix{c}, model).isZero(0.0));
}

TEST_CASE("reversing the drive reverses the cut currents") {
  const auto model = build_long_range_chain(7, 1.0, 1.4, 1.0, 1.0, 3.0);
  const auto forward = cut_currents(steady_state(model), model);
  const auto backward = cut_currents(steady_state(reversed(model)), reversed(model));
  CHECK((forward + backward).cwiseAbs().maxCoeff() <= 1e-12 * forward.cwiseAbs().maxCoeff());
  CHECK(forward.minCoeff() > 0.0);
}

TEST_CASE("particle-hole mirror symmetry of the symmetric chain") {
  auto model = build_long_range_chain(9, 1.0, 1.3, 1.0, 1.0, 4.0);
  const RealVector n = occupations(steady_state(model));
  std::swap(model.gamma_plus, model.gamma_minus);
  const RealVector swapped = occupations(steady_state(model));
  for (Index i = 0; i < 9; ++i) {
    CHECK(std::abs(n(i) - (1.0 - n(8 - i))) < 1e-12);
    CHECK(std::abs(swapped(i) - (1.0 - n(i))) < 1e-12);
  }
}

TEST_CASE("resistance is the inverse current") {
  CHECK(resistance(0.25) == 4.0);
  CHECK(error_of([] { resistance(0.0); }) == ErrorCode::zero_current);
  CHECK(error_of([] { resistance(1e-15); }) == ErrorCode::zero_current);
}

TEST_CASE("bulk linear fit quality") {
  RealVector line(40), curve(40);
  for (Index i = 0; i < 40; ++i) {
    line(i) = 0.9 - 0.02 * static_cast<double>(i);
    curve(i) = std::exp(-0.2 * static_cast<double>(i));
  }
  CHECK(bulk_linear_r2(line) == doctest::Approx(1.0));
  CHECK(bulk_linear_r2(curve) < 0.99);
  CHECK(error_of([] { bulk_linear_r2(RealVector::Zero(2)); }) == ErrorCode::insufficient_points);
}

TEST_CASE("report export") {
  const auto model = build_long_range_chain(3, 1.0, 1.5, 1.0, 1.0, 1.0);
  const auto report = transport_report(steady_state(model), model);
  std::ostringstream csv;
  write_report_csv(report, csv);
  CHECK(csv.str().find("site,occupation\n1,") != std::string::npos);
  const auto doc = nlohmann::json::parse(report_to_json(report));
  CHECK(doc.at("J_in").get<double>() == report.terminal_in);
  CHECK(doc.at("R_SS").get<double>() == report.resistance);
  CHECK(doc.at("occupations").size() == 3);
}
