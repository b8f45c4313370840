#pragma once

#include "nesscorr/model.hpp"
#include "nesscorr/steady_state.hpp"
#include "nesscorr/types.hpp"

#include <ostream>
#include <string>
#include <utility>

namespace nesscorr {

struct TransportReport {
  RealVector occupations;
  double terminal_in = 0.0;
  double terminal_out = 0.0;
  RealVector cut_currents;  // N - 1 entries, cut k separates sites <= k from sites > k
  double resistance = 0.0;  // 1 / terminal_in
};

// n_m = Re C_mm.
RealVector occupations(const CorrelationMatrix& c);

// J_in = Tr[gamma_plus (1 - C)], J_out = Tr[gamma_minus C]. Throws
// NotBoundaryDriven when the supports of gamma_plus and gamma_minus overlap.
std::pair<double, double> terminal_currents(const CorrelationMatrix& c, const NetworkModel& model);

// Particle current through every cut of a chain-ordered network; the bond
// (i, j) with i <= k < j carries 2 Im(H_ji C_ij) from i to j.
RealVector cut_currents(const CorrelationMatrix& c, const NetworkModel& model);

// 1 / current. Throws ZeroCurrent when current <= 1e-14.
double resistance(double current);

TransportReport transport_report(const CorrelationMatrix& c, const NetworkModel& model);

// Relative mismatch of the terminal and cut currents against terminal_in.
double continuity_defect(const TransportReport& report);

// Least-squares line through (i, n_i) over the bulk, dropping
// floor(edge_fraction * N) sites at each end; returns the coefficient of
// determination.
double bulk_linear_r2(const RealVector& occupations, double edge_fraction = 0.05);

void write_report_csv(const TransportReport& report, std::ostream& out);
std::string report_to_json(const TransportReport& report);

}  // namespace nesscorr
