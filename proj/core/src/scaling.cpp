#include "nesscorr/scaling.hpp"

#include "nesscorr/error.hpp"
#include "nesscorr/observables.hpp"
#include "nesscorr/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace nesscorr {

namespace {

struct Ols {
  double slope, intercept, sxx, sse;
  Index q;
};

Ols ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto q = static_cast<Index>(x.size());
  double mx = 0.0, my = 0.0;
  for (Index i = 0; i < q; ++i) {
    mx += x[static_cast<std::size_t>(i)];
    my += y[static_cast<std::size_t>(i)];
  }
  mx /= static_cast<double>(q);
  my /= static_cast<double>(q);
  double sxx = 0.0, sxy = 0.0;
  for (Index i = 0; i < q; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (y[static_cast<std::size_t>(i)] - my);
  }
  if (!(sxx > 0.0)) {
    throw SolverError(ErrorCode::insufficient_points, "fit abscissae are all equal");
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (Index i = 0; i < q; ++i) {
    const double e = y[static_cast<std::size_t>(i)] - (intercept + slope * x[static_cast<std::size_t>(i)]);
    sse += e * e;
  }
  return {slope, intercept, sxx, sse, q};
}

std::string sanitize(std::string text) {
  for (char& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return text;
}

std::pair<double, Index> key_of(const SweepPoint& p) { return {p.alpha, p.n_sites}; }

bool point_less(const SweepPoint& a, const SweepPoint& b) { return key_of(a) < key_of(b); }

SweepPoint solve_point(double alpha, Index n, const ChainParameters& chain,
                       const SteadyStateOptions& solver) {
  SweepPoint p;
  p.alpha = alpha;
  p.n_sites = n;
  const auto start = std::chrono::steady_clock::now();
  try {
    ChainParameters params = chain;
    params.alpha = alpha;
    params.n_sites = n;
    const NetworkModel model = build_long_range_chain(params);
    const SteadyStateResult result = solve_steady_state(model, solver);
    p.current = terminal_currents(result.correlation, model).first;
    p.resistance = resistance(p.current);
  } catch (const SolverError& e) {
    p.status = std::string(to_string(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    p.status = std::string("error: ") + e.what();
  }
  p.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  p.status = sanitize(p.status);
  return p;
}

}  // namespace

ScalingFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& resistances) {
  if (sizes.size() != resistances.size()) {
    throw SolverError(ErrorCode::invalid_argument, "sizes and resistances differ in length");
  }
  if (sizes.size() < 3) {
    throw SolverError(ErrorCode::insufficient_points, "power-law fit needs at least 3 points");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(resistances[i] > 0.0)) {
      throw SolverError(ErrorCode::nonpositive_resistance, "resistance must be positive");
    }
    if (!(sizes[i] > 0.0)) {
      throw SolverError(ErrorCode::invalid_argument, "sizes must be positive");
    }
    x.push_back(std::log(sizes[i]));
    y.push_back(std::log(resistances[i]));
  }
  const Ols ols = ordinary_least_squares(x, y);
  ScalingFit fit;
  fit.nu = ols.slope;
  fit.intercept = ols.intercept;
  fit.q = ols.q;
  fit.residual_rms = std::sqrt(ols.sse / static_cast<double>(ols.q - 2));
  fit.nu_stderr = fit.residual_rms / std::sqrt(ols.sxx);
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  fit.window = {*lo, *hi};
  return fit;
}

CriticalPointEstimate fit_nu_of_alpha(const std::vector<double>& alphas,
                                      const std::vector<double>& nus, double alpha_max_fit) {
  if (alphas.size() != nus.size()) {
    throw SolverError(ErrorCode::invalid_argument, "alphas and nus differ in length");
  }
  std::vector<double> a, v;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] < alpha_max_fit) {
      a.push_back(alphas[i]);
      v.push_back(nus[i]);
    }
  }
  if (a.size() < 3) {
    throw SolverError(ErrorCode::insufficient_points,
                      "critical-point fit needs at least 3 points below alpha_max_fit");
  }
  const auto q = static_cast<double>(a.size());
  CriticalPointEstimate est;
  est.points = static_cast<Index>(a.size());
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  est.alpha_window = {*lo, *hi};

  // Through-origin fit of nu + 2 = kappa * alpha.
  double saa = 0.0, say = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += a[i] * a[i];
    say += a[i] * (v[i] + 2.0);
  }
  est.kappa = say / saa;
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = v[i] + 2.0 - est.kappa * a[i];
    sse += e * e;
  }
  est.kappa_scatter = std::sqrt(sse / (q - 1.0));
  est.kappa_err = est.kappa_scatter / std::sqrt(saa);
  est.alpha_c = 3.0 / est.kappa;

  const Ols ols = ordinary_least_squares(a, v);
  LineFit& f = est.free_intercept;
  f.slope = ols.slope;
  f.intercept = ols.intercept;
  f.residual_rms = std::sqrt(ols.sse / (q - 2.0));
  f.slope_stderr = f.residual_rms / std::sqrt(ols.sxx);
  f.alpha_c = (1.0 - ols.intercept) / ols.slope;
  return est;
}

std::vector<double> alpha_grid(double start, double stop, double step) {
  std::vector<double> out;
  if (!(step > 0.0)) throw SolverError(ErrorCode::invalid_argument, "alpha step must be positive");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long k = 0; k <= count; ++k) {
    // Round to 1e-9 so grid values print as the decimals they stand for.
    out.push_back(std::round((start + static_cast<double>(k) * step) * 1e9) / 1e9);
  }
  return out;
}

SweepPlan small_system_preset() { return {alpha_grid(1.0, 2.0, 0.05), {512, 645, 813, 1024}}; }

SweepPlan large_system_preset() { return {alpha_grid(1.0, 2.0, 0.05), {7500, 8250, 9000}}; }

std::string sweep_csv_header() { return "alpha,n_sites,current,resistance,wall_seconds,status"; }

std::string sweep_csv_row(const SweepPoint& p) {
  std::ostringstream os;
  os.precision(17);
  os << p.alpha << ',' << p.n_sites << ',' << p.current << ',' << p.resistance << ','
     << p.wall_seconds << ',' << sanitize(p.status);
  return os.str();
}

std::vector<SweepPoint> read_sweep_csv(const std::filesystem::path& path) {
  std::vector<SweepPoint> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("alpha,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6) {
      throw SolverError(ErrorCode::invalid_argument, "malformed sweep row: " + line);
    }
    SweepPoint p;
    try {
      p.alpha = std::stod(cells[0]);
      p.n_sites = std::stol(cells[1]);
      p.current = std::stod(cells[2]);
      p.resistance = std::stod(cells[3]);
      p.wall_seconds = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw SolverError(ErrorCode::invalid_argument, "malformed sweep row: " + line);
    }
    p.status = cells[5];
    rows.push_back(std::move(p));
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepPoint>& rows, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw SolverError(ErrorCode::invalid_argument, "cannot write " + tmp.string());
    out << sweep_csv_header() << '\n';
    for (const auto& r : rows) out << sweep_csv_row(r) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SweepPoint> sweep(const SweepPlan& plan, const ChainParameters& chain,
                              const SweepOptions& options) {
  std::vector<SweepPoint> done;
  std::set<std::pair<double, Index>> present;
  if (options.output && options.resume) {
    done = read_sweep_csv(*options.output);
    for (const auto& p : done) present.insert(key_of(p));
  }

  std::vector<std::pair<double, Index>> todo;
  for (const double alpha : plan.alphas)
    for (const Index n : plan.sizes)
      if (!present.count({alpha, n})) todo.emplace_back(alpha, n);
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());

  std::ofstream log;
  if (options.output) {
    const bool fresh = !options.resume || !std::filesystem::exists(*options.output) ||
                       std::filesystem::file_size(*options.output) == 0;
    log.open(*options.output, fresh ? std::ios::trunc : std::ios::app);
    if (!log) {
      throw SolverError(ErrorCode::invalid_argument, "cannot write " + options.output->string());
    }
    if (fresh) log << sweep_csv_header() << '\n' << std::flush;
  }

  std::vector<SweepPoint> fresh_rows(todo.size());
  std::mutex io;
  ParallelOptions parallel{options.workers, Chunking::dynamic, 1};
  parallel_for(todo.size(), parallel, [&](std::size_t i) {
    fresh_rows[i] = solve_point(todo[i].first, todo[i].second, chain, options.solver);
    std::lock_guard lock(io);
    if (log.is_open()) log << sweep_csv_row(fresh_rows[i]) << '\n' << std::flush;
    if (options.on_point) options.on_point(fresh_rows[i]);
  });
  log.close();

  done.insert(done.end(), fresh_rows.begin(), fresh_rows.end());
  std::stable_sort(done.begin(), done.end(), point_less);
  if (options.output) write_sweep_csv(done, *options.output);
  return done;
}

std::vector<AlphaFit> fit_sweep(const std::vector<SweepPoint>& rows, double n_min, double n_max) {
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& p : rows) {
    auto& g = groups[p.alpha];
    const auto n = static_cast<double>(p.n_sites);
    if (!p.ok() || n < n_min || n > n_max) continue;
    g.first.push_back(n);
    g.second.push_back(p.resistance);
  }
  std::vector<AlphaFit> out;
  for (const auto& [alpha, data] : groups) {
    AlphaFit f;
    f.alpha = alpha;
    try {
      f.fit = fit_power_law(data.first, data.second);
    } catch (const SolverError& e) {
      f.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace nesscorr
