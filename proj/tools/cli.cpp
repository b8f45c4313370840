#include "cli.hpp"

#include "nesscorr/dynamics.hpp"
#include "nesscorr/error.hpp"
#include "nesscorr/linalg.hpp"
#include "nesscorr/model_io.hpp"
#include "nesscorr/observables.hpp"
#include "nesscorr/scaling.hpp"
#include "nesscorr/spectral.hpp"
#include "nesscorr/steady_state.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace nesscorr::cli {

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InputError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto stop = pos == std::string_view::npos ? text.size() : pos;
    if (stop > start) parts.push_back(text.substr(start, stop - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

struct SolverFlags {
  std::size_t workers = default_worker_count();
  std::size_t memory_budget = std::size_t{8} << 30;
  std::string kernel = "automatic";
  double stability_tol = -1.0;
  double residual_tol = 1e-10;
  double max_condition = 1e14;
  int refinement_steps = 3;
};

struct ModelSource {
  std::string chain;
  std::string model_path;
};

void add_solver_flags(CLI::App* app, SolverFlags& flags) {
  app->add_option("--workers", flags.workers, "Worker threads (default: NESSCORR_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  app->add_option("--memory-budget", flags.memory_budget,
                  "Largest superoperator allocation, e.g. 2GB")
      ->transform(CLI::AsSizeValue(false));
  app->add_option("--kernel", flags.kernel, "Superoperator formation kernel")
      ->check(CLI::IsMember({"automatic", "direct", "factored"}));
  app->add_option("--stability-tol", flags.stability_tol,
                  "Smallest admissible |lambda_p + conj(lambda_q)|; negative selects the default");
  app->add_option("--residual-tol", flags.residual_tol, "Eigendecomposition residual tolerance");
  app->add_option("--max-condition", flags.max_condition,
                  "Largest accepted condition estimate of the restricted system");
  app->add_option("--refinement-steps", flags.refinement_steps, "Residual-correction passes")
      ->check(CLI::NonNegativeNumber);
}

void add_model_source(CLI::App* app, ModelSource& source) {
  auto* chain = app->add_option("--chain", source.chain,
                                "Inline chain, e.g. N=64,v=1,alpha=1.5,sigma=1000,gin=1,gout=1");
  auto* model = app->add_option("--model", source.model_path, "JSON model file");
  chain->excludes(model);
}

SteadyStateOptions solver_options(const SolverFlags& flags) {
  SteadyStateOptions options;
  options.formation.parallel.workers = flags.workers;
  options.formation.memory_budget_bytes = flags.memory_budget;
  if (flags.kernel == "direct") options.formation.kernel = FormationKernel::direct;
  if (flags.kernel == "factored") options.formation.kernel = FormationKernel::factored;
  options.decompose.stability_tol = flags.stability_tol;
  options.decompose.residual_tol = flags.residual_tol;
  options.max_condition = flags.max_condition;
  options.refinement_steps = flags.refinement_steps;
  return options;
}

NetworkModel load_source(const ModelSource& source) {
  if (source.chain.empty() == source.model_path.empty()) {
    throw InputError("exactly one of --chain or --model is required");
  }
  if (!source.chain.empty()) return build_long_range_chain(parse_chain(source.chain));
  return load_model_file(source.model_path);
}

json violations_json(const std::vector<ModelViolation>& violations) {
  json list = json::array();
  for (const auto& v : violations) {
    list.push_back({{"matrix", v.matrix}, {"property", v.property}, {"defect", v.defect}});
  }
  return list;
}

void write_json(const json& doc, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  std::ofstream file(path);
  if (!file) throw InputError("cannot write " + path);
  file << doc.dump(2) << '\n';
}

int report_error(std::ostream& out, int exit_code, std::string_view code, std::string_view message,
                 const std::vector<ModelViolation>& violations = {}) {
  json doc{{"error", {{"code", code}, {"message", message}}}};
  if (!violations.empty()) doc["error"]["violations"] = violations_json(violations);
  out << doc.dump(2) << '\n';
  return exit_code;
}

// Validation failures are reported with their full violation list before any
// solver work starts.
std::optional<int> reject_invalid(const NetworkModel& model, std::ostream& out) {
  const auto violations = validate_model(model);
  if (violations.empty()) return std::nullopt;
  return report_error(out, exit_invalid_input, to_string(ErrorCode::invalid_model),
                      "model violates structural requirements", violations);
}

int solve_command(const ModelSource& source, const SolverFlags& flags, const std::string& output,
                  const std::string& save_model, std::ostream& out) {
  const NetworkModel model = load_source(source);
  if (auto rejected = reject_invalid(model, out)) return *rejected;
  if (!save_model.empty()) save_model_file(model, save_model);

  const SteadyStateResult result = solve_steady_state(model, solver_options(flags));
  const double gp_norm = model.gamma_plus.norm();
  const double stationarity = stationarity_residual(result.correlation.values, model).norm();

  json meta{
      {"convention_version", kConventionVersion},
      {"n_modes", model.n_modes},
      {"strategy", to_string(result.strategy.tag)},
      {"predicted_cost", result.strategy.predicted_cost},
      {"pattern_kind", to_string(result.pattern_kind)},
      {"n_sigma", result.n_sigma},
      {"kernel", to_string(result.formation.kernel)},
      {"factor_rank", result.formation.factor_rank},
      {"spectral_condition", result.spectral_condition},
      {"system_condition", result.system_condition},
      {"residual_history", result.residual_history},
      {"stationarity_residual", stationarity},
      {"stationarity_relative", gp_norm > 0.0 ? stationarity / gp_norm : stationarity},
      {"decompose_seconds", result.decompose_seconds},
      {"formation_seconds", result.formation.seconds},
      {"wall_seconds", result.wall_seconds},
      {"workers", flags.workers},
  };
  if (result.physicality) {
    meta["physicality"] = {{"ok", result.physicality->ok()},
                           {"hermitian_defect", result.physicality->hermitian_defect},
                           {"min_eigenvalue", result.physicality->min_eigenvalue},
                           {"max_eigenvalue", result.physicality->max_eigenvalue}};
  }

  json doc{{"metadata", meta}};
  std::optional<TransportReport> report;
  try {
    report = transport_report(result.correlation, model);
    doc["report"] = json::parse(report_to_json(*report));
  } catch (const SolverError& e) {
    if (e.code() != ErrorCode::not_boundary_driven && e.code() != ErrorCode::zero_current) throw;
    const RealVector n = occupations(result.correlation);
    doc["report"] = {{"occupations", std::vector<double>(n.begin(), n.end())},
                     {"transport", std::string(to_string(e.code())) + ": " + e.what()}};
  }

  if (output.empty()) {
    out << doc.dump(2) << '\n';
    return exit_ok;
  }
  write_json(doc, output + ".json", out);
  std::ofstream csv(output + ".csv");
  if (!csv) throw InputError("cannot write " + output + ".csv");
  if (report) {
    write_report_csv(*report, csv);
  } else {
    csv.precision(17);
    csv << "site,occupation\n";
    const RealVector n = occupations(result.correlation);
    for (Index i = 0; i < n.size(); ++i) csv << (i + 1) << ',' << n(i) << '\n';
  }
  out << json{{"metadata", meta}}.dump(2) << '\n';
  return exit_ok;
}

std::vector<double> parse_alphas(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InputError("alpha range must be start:stop:step");
    return alpha_grid(parse_number(parts[0], "alpha start"), parse_number(parts[1], "alpha stop"),
                      parse_number(parts[2], "alpha step"));
  }
  std::vector<double> alphas;
  for (const auto part : split(text, ',')) alphas.push_back(parse_number(part, "alpha"));
  return alphas;
}

std::vector<Index> parse_sizes(const std::string& text) {
  std::vector<Index> sizes;
  for (const auto part : split(text, ',')) {
    const double n = parse_number(part, "size");
    if (n < 2 || n != static_cast<double>(static_cast<Index>(n))) {
      throw InputError("sizes must be integers >= 2");
    }
    sizes.push_back(static_cast<Index>(n));
  }
  return sizes;
}

struct SweepFlags {
  std::string preset;
  std::string alphas;
  std::string sizes;
  std::string chain = "sigma=1000";
  std::string output;
  bool resume = false;
};

int sweep_command(const SweepFlags& sweep_flags, const SolverFlags& flags, std::ostream& out,
                  std::ostream& err) {
  SweepPlan plan;
  if (sweep_flags.preset == "small-system") plan = small_system_preset();
  if (sweep_flags.preset == "large-system") {
    plan = large_system_preset();
    err << "note: large-system preset is long-running (hours per point on one core)\n";
  }
  if (!sweep_flags.alphas.empty()) plan.alphas = parse_alphas(sweep_flags.alphas);
  if (!sweep_flags.sizes.empty()) plan.sizes = parse_sizes(sweep_flags.sizes);
  if (sweep_flags.preset.empty() && (sweep_flags.alphas.empty() || sweep_flags.sizes.empty())) {
    throw InputError("sweep needs --preset or both --alphas and --sizes");
  }

  const ChainParameters chain = parse_chain(sweep_flags.chain, ChainParameters{2, 1.0, 1.5, 1.0, 1.0, 1000.0});
  SweepOptions options;
  options.output = sweep_flags.output;
  options.resume = sweep_flags.resume;
  options.workers = flags.workers;
  options.solver = solver_options(flags);
  options.solver.formation.parallel.workers = 1;
  options.on_point = [&err](const SweepPoint& p) {
    err << "alpha=" << p.alpha << " N=" << p.n_sites << " " << p.status << " ("
        << p.wall_seconds << " s)\n";
  };
  const auto rows = sweep(plan, chain, options);

  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.ok() ? 1 : 0;
  out << json{{"rows", rows.size()}, {"ok", ok}, {"failed", rows.size() - ok},
              {"output", sweep_flags.output}, {"convention_version", kConventionVersion}}
             .dump(2)
      << '\n';
  return rows.empty() || ok > 0 ? exit_ok : exit_runtime;
}

struct FitFlags {
  std::string input;
  std::string output;
  double n_min = 0.0;
  double n_max = std::numeric_limits<double>::infinity();
  double alpha_max_fit = 1.5;
};

int fit_command(const FitFlags& fit_flags, std::ostream& out) {
  if (!std::filesystem::exists(fit_flags.input)) {
    throw InputError("sweep table not found: " + fit_flags.input);
  }
  const auto rows = read_sweep_csv(fit_flags.input);
  const auto fits = fit_sweep(rows, fit_flags.n_min, fit_flags.n_max);

  json per_alpha = json::array();
  std::vector<double> alphas, nus;
  for (const auto& f : fits) {
    if (f.fit) {
      per_alpha.push_back({{"alpha", f.alpha},
                           {"nu", f.fit->nu},
                           {"nu_stderr", f.fit->nu_stderr},
                           {"intercept", f.fit->intercept},
                           {"s", f.fit->residual_rms},
                           {"q", f.fit->q},
                           {"window", {f.fit->window.first, f.fit->window.second}}});
      alphas.push_back(f.alpha);
      nus.push_back(f.fit->nu);
    } else {
      per_alpha.push_back({{"alpha", f.alpha}, {"error", f.error}});
    }
  }

  json critical;
  try {
    const auto est = fit_nu_of_alpha(alphas, nus, fit_flags.alpha_max_fit);
    critical = {{"kappa", est.kappa},
                {"kappa_err", est.kappa_err},
                {"kappa_scatter_s", est.kappa_scatter},
                {"alpha_c", est.alpha_c},
                {"alpha_window", {est.alpha_window.first, est.alpha_window.second}},
                {"points", est.points},
                {"free_intercept",
                 {{"kappa", est.free_intercept.slope},
                  {"kappa_err", est.free_intercept.slope_stderr},
                  {"intercept", est.free_intercept.intercept},
                  {"s", est.free_intercept.residual_rms},
                  {"alpha_c", est.free_intercept.alpha_c}}}};
  } catch (const SolverError& e) {
    critical = {{"error", std::string(to_string(e.code())) + ": " + e.what()}};
  }
  write_json({{"fits", per_alpha}, {"critical_point", critical}}, fit_flags.output, out);
  return exit_ok;
}

struct DynamicsFlags {
  double t_final = 0.0;
  double step = 0.0;
  std::size_t record_every = 0;
  std::string output;
};

int dynamics_command(const ModelSource& source, const DynamicsFlags& dyn, std::ostream& out) {
  const NetworkModel model = load_source(source);
  if (auto rejected = reject_invalid(model, out)) return *rejected;
  if (!(dyn.t_final > 0.0)) throw InputError("--t-final must be positive");
  StepControl control;
  control.step = dyn.step;
  control.record_every = dyn.record_every;
  const CorrelationMatrix zero{Matrix::Zero(model.n_modes, model.n_modes)};
  const Trajectory trajectory = integrate(model, zero, dyn.t_final, control);
  if (dyn.output.empty()) {
    write_trajectory_csv(trajectory, out);
    return exit_ok;
  }
  std::ofstream csv(dyn.output);
  if (!csv) throw InputError("cannot write " + dyn.output);
  write_trajectory_csv(trajectory, csv);
  out << json{{"snapshots", trajectory.times.size()},
              {"final_residual", trajectory.residuals.empty() ? 0.0 : trajectory.residuals.back()},
              {"residual_monotone", trajectory.residual_monotone},
              {"output", dyn.output}}
             .dump(2)
      << '\n';
  return exit_ok;
}

int validate_command(const ModelSource& source, const std::string& save_model, std::ostream& out) {
  const NetworkModel model = load_source(source);
  const auto violations = validate_model(model);
  json doc{{"valid", violations.empty()}, {"n_modes", model.n_modes},
           {"violations", violations_json(violations)}};
  if (violations.empty()) {
    const auto pattern = dephasing_pattern(model);
    const auto strategy = choose_strategy(model.n_modes, pattern);
    doc["pattern_kind"] = to_string(pattern.kind);
    doc["n_sigma"] = pattern.n_sigma;
    doc["strategy"] = to_string(strategy.tag);
    doc["predicted_cost"] = strategy.predicted_cost;
    if (!save_model.empty()) save_model_file(model, save_model);
  }
  out << doc.dump(2) << '\n';
  return violations.empty() ? exit_ok : exit_invalid_input;
}

}  // namespace

ChainParameters parse_chain(std::string_view text, ChainParameters base) {
  for (const auto item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InputError("chain entry '" + std::string(item) + "' lacks '='");
    const auto key = item.substr(0, eq);
    const double value = parse_number(item.substr(eq + 1), key);
    if (key == "N" || key == "n") {
      if (value != static_cast<double>(static_cast<Index>(value))) throw InputError("N must be an integer");
      base.n_sites = static_cast<Index>(value);
    } else if (key == "v") {
      base.v = value;
    } else if (key == "alpha") {
      base.alpha = value;
    } else if (key == "sigma") {
      base.sigma = value;
    } else if (key == "gin") {
      base.gamma_in = value;
    } else if (key == "gout") {
      base.gamma_out = value;
    } else {
      throw InputError("unknown chain key '" + std::string(key) + "'");
    }
  }
  return base;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonequilibrium steady states of quadratic fermionic networks", "nesscorr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("nesscorr 0.1.0 (") + std::string(kConventionVersion) + ")");

  SolverFlags flags;
  ModelSource source;
  std::string output, save_model;

  auto* solve = app.add_subcommand("solve", "Solve for the steady state and transport report");
  add_model_source(solve, source);
  add_solver_flags(solve, flags);
  solve->add_option("--output", output, "Write <prefix>.json and <prefix>.csv");
  solve->add_option("--save-model", save_model, "Write the model config to this file");

  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of chain solves into a CSV table");
  sweep_cmd->add_option("--preset", sweep_flags.preset, "Named grid")
      ->check(CLI::IsMember({"small-system", "large-system"}));
  sweep_cmd->add_option("--alphas", sweep_flags.alphas, "start:stop:step or a comma list");
  sweep_cmd->add_option("--sizes", sweep_flags.sizes, "Comma list of chain lengths");
  sweep_cmd->add_option("--chain", sweep_flags.chain, "Chain parameters other than N and alpha")
      ->capture_default_str();
  sweep_cmd->add_option("--output", sweep_flags.output, "Sweep table CSV")->required();
  sweep_cmd->add_flag("--resume", sweep_flags.resume, "Skip (alpha, N) rows already in the table");
  add_solver_flags(sweep_cmd, flags);

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit R ~ N^nu per alpha and the critical point");
  fit->add_option("--input", fit_flags.input, "Sweep table CSV")->required();
  fit->add_option("--output", fit_flags.output, "JSON output file (default: stdout)");
  fit->add_option("--n-min", fit_flags.n_min, "Smallest N in the fit window");
  fit->add_option("--n-max", fit_flags.n_max, "Largest N in the fit window");
  fit->add_option("--alpha-max-fit", fit_flags.alpha_max_fit, "Fit nu(alpha) below this alpha")
      ->capture_default_str();

  DynamicsFlags dyn;
  auto* dynamics = app.add_subcommand("dynamics", "Integrate the equation of motion from C = 0");
  add_model_source(dynamics, source);
  dynamics->add_option("--t-final", dyn.t_final, "Final time")->required();
  dynamics->add_option("--step", dyn.step, "RK4 step (default: derived from the rates)");
  dynamics->add_option("--record-every", dyn.record_every, "Snapshot every k steps");
  dynamics->add_option("--output", dyn.output, "Trajectory CSV (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Check a model and report the solve strategy");
  add_model_source(validate, source);
  validate->add_option("--save-model", save_model, "Write the model config to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    return report_error(out, exit_invalid_input, "InvalidArgument", e.what());
  }

  try {
    if (solve->parsed()) return solve_command(source, flags, output, save_model, out);
    if (sweep_cmd->parsed()) return sweep_command(sweep_flags, flags, out, err);
    if (fit->parsed()) return fit_command(fit_flags, out);
    if (dynamics->parsed()) return dynamics_command(source, dyn, out);
    if (validate->parsed()) return validate_command(source, save_model, out);
  } catch (const InputError& e) {
    return report_error(out, exit_invalid_input, "InvalidArgument", e.what());
  } catch (const SolverError& e) {
    return report_error(out, is_input_error(e.code()) ? exit_invalid_input : exit_runtime,
                        to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return report_error(out, exit_runtime, "RuntimeError", e.what());
  }
  return exit_invalid_input;
}

}  // namespace nesscorr::cli
