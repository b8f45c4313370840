#include "nesscorr/observables.hpp"

#include "nesscorr/error.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace nesscorr {

namespace {

std::vector<bool> support_of(const Matrix& m) {
  std::vector<bool> s(static_cast<std::size_t>(m.rows()), false);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Complex(0.0)) s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(j)] = true;
  return s;
}

}  // namespace

RealVector occupations(const CorrelationMatrix& c) { return c.values.diagonal().real(); }

std::pair<double, double> terminal_currents(const CorrelationMatrix& c, const NetworkModel& model) {
  const auto in = support_of(model.gamma_plus);
  const auto out = support_of(model.gamma_minus);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] && out[i]) {
      throw SolverError(ErrorCode::not_boundary_driven,
                        "injection and depletion act on the same mode " + std::to_string(i));
    }
  }
  const Matrix& x = c.values;
  // Tr[g (1 - C)] = sum_ij g_ij (delta_ji - C_ji)
  const double j_in = (model.gamma_plus.trace() -
                       model.gamma_plus.cwiseProduct(x.transpose()).sum()).real();
  const double j_out = model.gamma_minus.cwiseProduct(x.transpose()).sum().real();
  return {j_in, j_out};
}

RealVector cut_currents(const CorrelationMatrix& c, const NetworkModel& model) {
  const Index n = model.n_modes;
  const Matrix& x = c.values;
  const Matrix& h = model.hopping;
  RealVector cuts = RealVector::Zero(std::max<Index>(n - 1, 0));
  // cut k = cut k-1 + (current leaving site k to the right) - (arriving from the left)
  double running = 0.0;
  for (Index k = 0; k + 1 < n; ++k) {
    double out_right = 0.0;
    for (Index j = k + 1; j < n; ++j) out_right += 2.0 * std::imag(h(j, k) * x(k, j));
    double in_left = 0.0;
    for (Index i = 0; i < k; ++i) in_left += 2.0 * std::imag(h(k, i) * x(i, k));
    running += out_right - in_left;
    cuts(k) = running;
  }
  return cuts;
}

double resistance(double current) {
  if (!(current > 1e-14)) {
    std::ostringstream os;
    os << "steady-state current " << current << " is zero; resistance undefined";
    throw SolverError(ErrorCode::zero_current, os.str());
  }
  return 1.0 / current;
}

TransportReport transport_report(const CorrelationMatrix& c, const NetworkModel& model) {
  TransportReport r;
  r.occupations = occupations(c);
  std::tie(r.terminal_in, r.terminal_out) = terminal_currents(c, model);
  r.cut_currents = cut_currents(c, model);
  r.resistance = resistance(r.terminal_in);
  return r;
}

double continuity_defect(const TransportReport& report) {
  const double scale = std::max(std::abs(report.terminal_in), 1e-30);
  double worst = std::abs(report.terminal_in - report.terminal_out);
  for (Index k = 0; k < report.cut_currents.size(); ++k) {
    worst = std::max(worst, std::abs(report.cut_currents(k) - report.terminal_in));
  }
  return worst / scale;
}

double bulk_linear_r2(const RealVector& n, double edge_fraction) {
  const Index size = n.size();
  const auto skip = static_cast<Index>(std::floor(edge_fraction * static_cast<double>(size)));
  const Index count = size - 2 * skip;
  if (count < 3) {
    throw SolverError(ErrorCode::insufficient_points, "bulk window has fewer than 3 sites");
  }
  const RealVector y = n.segment(skip, count);
  const RealVector x = RealVector::LinSpaced(count, static_cast<double>(skip + 1),
                                             static_cast<double>(skip + count));
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double syy = (y.array() - my).square().sum();
  if (syy == 0.0) return 1.0;
  const double slope = sxy / sxx;
  const double sse = ((y.array() - my) - slope * (x.array() - mx)).square().sum();
  return 1.0 - sse / syy;
}

void write_report_csv(const TransportReport& report, std::ostream& out) {
  out << std::setprecision(17);
  out << "# J_in=" << report.terminal_in << " J_out=" << report.terminal_out
      << " R_SS=" << report.resistance << '\n';
  out << "site,occupation\n";
  for (Index i = 0; i < report.occupations.size(); ++i) {
    out << (i + 1) << ',' << report.occupations(i) << '\n';
  }
}

std::string report_to_json(const TransportReport& report) {
  nlohmann::json doc;
  doc["J_in"] = report.terminal_in;
  doc["J_out"] = report.terminal_out;
  doc["R_SS"] = report.resistance;
  doc["occupations"] = std::vector<double>(report.occupations.begin(), report.occupations.end());
  doc["cut_currents"] = std::vector<double>(report.cut_currents.begin(), report.cut_currents.end());
  doc["continuity_defect"] = continuity_defect(report);
  return doc.dump(2);
}

}  // namespace nesscorr
