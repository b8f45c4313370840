#include "cli.hpp"
#include "nesscorr/model_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nesscorr;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "nesscorr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(path);
  return path.string();
}

}  // namespace

TEST_CASE("chain flag parsing") {
  const auto c = cli::parse_chain("N=64,v=2,alpha=1.25,sigma=1000,gin=0.5,gout=0.25");
  CHECK(c.n_sites == 64);
  CHECK(c.v == 2.0);
  CHECK(c.alpha == 1.25);
  CHECK(c.sigma == 1000.0);
  CHECK(c.gamma_in == 0.5);
  CHECK(c.gamma_out == 0.25);
  CHECK(cli::parse_chain("N=8").alpha == ChainParameters{}.alpha);
  CHECK_THROWS(cli::parse_chain("N=8,beta=2"));
  CHECK_THROWS(cli::parse_chain("N=8.5"));
  CHECK_THROWS(cli::parse_chain("N"));
}

TEST_CASE("solve a dephased chain") {
  const auto r = run({"solve", "--chain", "N=64,v=1,alpha=1.5,sigma=1000,gin=1,gout=1"});
  REQUIRE(r.code == 0);
  const auto doc = r.doc();
  const auto& report = doc.at("report");
  const double j_in = report.at("J_in").get<double>();
  CHECK(std::abs(j_in - report.at("J_out").get<double>()) <= 1e-10 * j_in);
  const auto& meta = doc.at("metadata");
  CHECK(meta.at("strategy") == "restricted_per_element");
  CHECK(meta.at("convention_version") == "exp(Ht)-gram-delta/1");
  CHECK(meta.at("stationarity_relative").get<double>() <= 1e-10);
  CHECK(meta.contains("predicted_cost"));
  CHECK(meta.contains("wall_seconds"));
  CHECK(meta.at("residual_history").size() >= 1);
}

TEST_CASE("solve from a model file without dephasing") {
  const auto model_path = temp_path("nesscorr_cli_model.json");
  save_model_file(build_long_range_chain(6, 1.0, 1.2, 1.0, 1.0, 0.0), model_path);
  const auto prefix = temp_path("nesscorr_cli_solve");
  const auto r = run({"solve", "--model", model_path, "--output", prefix});
  REQUIRE(r.code == 0);
  CHECK(r.doc().at("metadata").at("strategy") == "lyapunov_only");
  CHECK(std::filesystem::exists(prefix + ".csv"));
  std::ifstream json_file(prefix + ".json");
  CHECK(json::parse(json_file).at("report").at("occupations").size() == 6);
  std::filesystem::remove(model_path);
  std::filesystem::remove(prefix + ".csv");
  std::filesystem::remove(prefix + ".json");
}

TEST_CASE("invalid inputs exit with code 2") {
  const auto path = temp_path("nesscorr_cli_bad.json");
  std::ofstream(path) << R"({"n_modes": 2, "gamma_plus": [[1, 2], [2, 1]]})";
  const auto r = run({"solve", "--model", path});
  CHECK(r.code == 2);
  const auto err = r.doc().at("error");
  CHECK(err.at("code") == "InvalidModel");
  CHECK(err.at("violations").at(0).at("matrix") == "gamma_plus");
  CHECK(run({"validate", "--model", path}).code == 2);
  std::filesystem::remove(path);

  CHECK(run({"solve"}).code == 2);
  CHECK(run({"solve", "--chain", "N=4", "--model", "x.json"}).code == 2);
  CHECK(run({"solve", "--model", "/nonexistent.json"}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"solve", "--chain", "N=1"}).code == 2);
}

TEST_CASE("solver failures exit with code 1") {
  const auto path = temp_path("nesscorr_cli_closed.json");
  std::ofstream(path) << R"({"n_modes": 2, "hopping": [[0, 1], [1, 0]]})";
  const auto r = run({"solve", "--model", path});
  CHECK(r.code == 1);
  CHECK(r.doc().at("error").at("code") == "NonDissipativePair");
  std::filesystem::remove(path);
}

TEST_CASE("validate reports the strategy and round-trips the config") {
  const auto saved = temp_path("nesscorr_cli_saved.json");
  const auto r = run({"validate", "--chain", "N=10,sigma=2", "--save-model", saved});
  REQUIRE(r.code == 0);
  CHECK(r.doc().at("valid") == true);
  CHECK(r.doc().at("pattern_kind") == "onsite_all");
  const auto loaded = load_model_file(saved);
  const auto built = build_long_range_chain(10, 1.0, 1.5, 1.0, 1.0, 2.0);
  CHECK(loaded.hopping == built.hopping);
  CHECK(loaded.gamma_plus == built.gamma_plus);
  CHECK(loaded.gamma_minus == built.gamma_minus);
  CHECK(loaded.dephasing == built.dephasing);
  std::filesystem::remove(saved);
}

TEST_CASE("sweep, resume and fit") {
  const auto table = temp_path("nesscorr_cli_sweep.csv");
  const auto first = run({"sweep", "--alphas", "1.0:1.2:0.1", "--sizes", "12,16,20", "--chain",
                          "sigma=50", "--output", table, "--workers", "2"});
  REQUIRE(first.code == 0);
  CHECK(first.doc().at("ok") == 9);
  CHECK(first.err.find("alpha=") != std::string::npos);

  const auto again = run({"sweep", "--alphas", "1.0:1.2:0.1", "--sizes", "12,16,20", "--chain",
                          "sigma=50", "--output", table, "--resume"});
  REQUIRE(again.code == 0);
  CHECK(again.err.empty());

  const auto fit = run({"fit", "--input", table});
  REQUIRE(fit.code == 0);
  const auto doc = fit.doc();
  CHECK(doc.at("fits").size() == 3);
  CHECK(doc.at("fits").at(0).at("q") == 3);
  CHECK(doc.at("critical_point").contains("kappa"));
  CHECK(doc.at("critical_point").at("free_intercept").contains("alpha_c"));

  const auto narrow = run({"fit", "--input", table, "--n-max", "14"});
  CHECK(narrow.doc().at("fits").at(0).at("error").get<std::string>().find("InsufficientPoints") == 0);
  CHECK(run({"fit", "--input", "/nonexistent.csv"}).code == 2);
  CHECK(run({"sweep", "--output", table}).code == 2);
  std::filesystem::remove(table);
}

TEST_CASE("dynamics trace") {
  const auto out = temp_path("nesscorr_cli_traj.csv");
  const auto r = run({"dynamics", "--chain", "N=3,sigma=1", "--t-final", "5", "--record-every",
                      "10", "--output", out});
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,n_1,n_2,n_3,residual");
  CHECK(r.doc().at("snapshots").get<int>() > 2);
  CHECK(run({"dynamics", "--chain", "N=3", "--t-final", "0"}).code == 2);
  std::filesystem::remove(out);
}

TEST_CASE("help and version") {
  CHECK(run({"--help"}).code == 0);
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("exp(Ht)-gram-delta/1") != std::string::npos);
}
