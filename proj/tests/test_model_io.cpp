#include "nesscorr/error.hpp"
#include "nesscorr/model_io.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <filesystem>

using namespace nesscorr;

namespace {

bool identical(const NetworkModel& a, const NetworkModel& b) {
  return a.n_modes == b.n_modes && a.hopping == b.hopping && a.gamma_plus == b.gamma_plus &&
         a.gamma_minus == b.gamma_minus && a.dephasing == b.dephasing;
}

ErrorCode code_of(std::string_view text) {
  try {
    model_from_json(text);
  } catch (const SolverError& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("model config round trip is exact") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = testing::random_model(rng, 1 + trial % 6);
    CHECK(identical(model_from_json(model_to_json(model)), model));
  }
}

TEST_CASE("model file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "nesscorr_model_roundtrip.json";
  const auto model = build_long_range_chain(7, 0.9, 1.3, 0.4, 0.6, 12.5);
  save_model_file(model, path);
  CHECK(identical(load_model_file(path), model));
  std::filesystem::remove(path);
}

TEST_CASE("chain and onsite shorthands match the builder") {
  const auto parsed = model_from_json(R"({
    "n_modes": 5,
    "hopping": {"type": "long_range_chain", "v": 1.0, "alpha": 1.5},
    "gamma_plus": [[0, 0, 1.0]],
    "gamma_minus": {"type": "sparse", "entries": [[4, 4, 1.0]]},
    "sigma": {"type": "onsite", "value": 1000}
  })");
  CHECK(identical(parsed, build_long_range_chain(5, 1.0, 1.5, 1.0, 1.0, 1000.0)));
}

TEST_CASE("complex entries and omitted matrices") {
  const auto m = model_from_json(R"({
    "n_modes": 2,
    "hopping": [[0, [0.8, 0.6]], [[0.8, -0.6], 0]]
  })");
  CHECK(m.hopping(0, 1) == Complex(0.8, 0.6));
  CHECK(m.hopping(1, 0) == Complex(0.8, -0.6));
  CHECK(m.gamma_plus.isZero(0.0));
  CHECK(m.dephasing.isZero(0.0));
}

TEST_CASE("sparse triplets accumulate and use zero-based indices") {
  const auto m = model_from_json(R"({
    "n_modes": 4,
    "gamma_plus": [[1, 2, [0.5, 0.5]], [2, 1, [0.5, -0.5]], [1, 1, 1.0], [1, 1, 1.0]]
  })");
  CHECK(m.gamma_plus(1, 1) == Complex(2.0));
  CHECK(m.gamma_plus(1, 2) == Complex(0.5, 0.5));
  CHECK(m.gamma_plus(2, 1) == Complex(0.5, -0.5));
}

TEST_CASE("malformed configs are invalid models") {
  CHECK(code_of("{") == ErrorCode::invalid_model);
  CHECK(code_of("[]") == ErrorCode::invalid_model);
  CHECK(code_of(R"({"n_modes": 0})") == ErrorCode::invalid_model);
  CHECK(code_of(R"({"n_modes": 2, "hopping": [[0, 0, 1], [5, 0, 1], [0, 0, 1]]})") ==
        ErrorCode::invalid_model);
  CHECK(code_of(R"({"n_modes": 2, "sigma": [[0, [0, 1]], [[0, 1], 0]]})") ==
        ErrorCode::invalid_model);
  CHECK(code_of(R"({"n_modes": 2, "hopping": {"type": "mystery"}})") == ErrorCode::invalid_model);
  CHECK(code_of(R"({"n_modes": 3, "hopping": {"type": "long_range_chain"}})") ==
        ErrorCode::invalid_model);
  CHECK(code_of(R"({"n_modes": 2, "hopping": "dense"})") == ErrorCode::invalid_model);
}

TEST_CASE("loading a missing file is an invalid model") {
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.json"), SolverError);
}
