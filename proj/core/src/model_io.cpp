#include "nesscorr/model_io.hpp"

#include "nesscorr/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace nesscorr {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_config(const std::string& what) {
  throw SolverError(ErrorCode::invalid_model, "model config: " + what);
}

Complex parse_complex(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  bad_config(std::string(key) + ": entries must be numbers or [re, im] pairs");
}

bool looks_dense(const json& v, Index n) {
  if (!v.is_array() || static_cast<Index>(v.size()) != n) return false;
  for (const auto& row : v) {
    if (!row.is_array() || static_cast<Index>(row.size()) != n) return false;
    for (const auto& e : row) {
      if (!e.is_number() && !(e.is_array() && e.size() == 2)) return false;
    }
  }
  return true;
}

Matrix parse_dense(const json& v, Index n, const char* key) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = parse_complex(v[i][j], key);
  return m;
}

Matrix parse_triplets(const json& entries, Index n, const char* key) {
  if (!entries.is_array()) bad_config(std::string(key) + ": expected a triplet list");
  Matrix m = Matrix::Zero(n, n);
  for (const auto& t : entries) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer()) {
      bad_config(std::string(key) + ": triplets are [i, j, value]");
    }
    const auto i = t[0].get<Index>();
    const auto j = t[1].get<Index>();
    if (i < 0 || j < 0 || i >= n || j >= n) {
      bad_config(std::string(key) + ": index out of range");
    }
    m(i, j) += parse_complex(t[2], key);
  }
  return m;
}

Matrix parse_matrix(const json& doc, const char* key, Index n) {
  if (!doc.contains(key) || doc[key].is_null()) return Matrix::Zero(n, n);
  const json& v = doc[key];
  if (v.is_object()) {
    const std::string type = v.value("type", "");
    if (type == "sparse") return parse_triplets(v.at("entries"), n, key);
    if (type == "onsite") {
      return Complex(v.at("value").get<double>(), 0.0) * Matrix::Identity(n, n);
    }
    if (type == "long_range_chain") {
      if (n < 2) bad_config("long_range_chain needs n_modes >= 2");
      const double alpha = v.at("alpha").get<double>();
      if (!(alpha > 0.0)) bad_config("long_range_chain alpha must be positive");
      return long_range_hopping(n, v.value("v", 1.0), alpha);
    }
    bad_config(std::string(key) + ": unknown type '" + type + "'");
  }
  if (looks_dense(v, n)) return parse_dense(v, n, key);
  return parse_triplets(v, n, key);
}

json complex_entry(Complex z) { return json::array({z.real(), z.imag()}); }

}  // namespace

NetworkModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    bad_config(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) bad_config("top level must be an object");
  try {
    if (!doc.contains("n_modes") || !doc["n_modes"].is_number_integer()) {
      bad_config("n_modes must be an integer");
    }
    NetworkModel model;
    model.n_modes = doc["n_modes"].get<Index>();
    if (model.n_modes < 1) bad_config("n_modes must be positive");
    const Index n = model.n_modes;
    model.hopping = parse_matrix(doc, "hopping", n);
    model.gamma_plus = parse_matrix(doc, "gamma_plus", n);
    model.gamma_minus = parse_matrix(doc, "gamma_minus", n);
    const Matrix sigma = parse_matrix(doc, "sigma", n);
    if (sigma.imag().cwiseAbs().maxCoeff() != 0.0) bad_config("sigma must be real");
    model.dephasing = sigma.real();
    return model;
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
}

std::string model_to_json(const NetworkModel& model) {
  const Index n = model.n_modes;
  auto dense = [n](const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < n; ++i) {
      json row = json::array();
      for (Index j = 0; j < n; ++j) row.push_back(complex_entry(m(i, j)));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json sigma = json::array();
  for (Index i = 0; i < n; ++i) {
    json row = json::array();
    for (Index j = 0; j < n; ++j) row.push_back(model.dephasing(i, j));
    sigma.push_back(std::move(row));
  }
  json doc = {{"n_modes", n},
              {"hopping", dense(model.hopping)},
              {"gamma_plus", dense(model.gamma_plus)},
              {"gamma_minus", dense(model.gamma_minus)},
              {"sigma", std::move(sigma)}};
  return doc.dump(2);
}

NetworkModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

void save_model_file(const NetworkModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SolverError(ErrorCode::invalid_argument, "cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

}  // namespace nesscorr
