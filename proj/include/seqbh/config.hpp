#pragma once

#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqbh/monte_carlo.hpp"
#include "seqbh/stream_model.hpp"

namespace seqbh {

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument(path + ": " + msg);
}

inline void expect_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path, "expected an object");
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) config_fail(path, "unknown key '" + item.key() + "'");
  }
}

inline const nlohmann::json* find_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const std::string& path) {
  const auto* f = find_field(j, key);
  if (!f) config_fail(path + "." + key, "missing required field");
  return *f;
}

inline double as_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  return v.get<double>();
}

inline long long as_integer(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) config_fail(path, "expected an integer");
  return v.get<long long>();
}

inline std::string as_string(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> as_number_array(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Matrix as_matrix(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of rows");
  Matrix m;
  m.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    m.push_back(as_number_array(v[i], path + "[" + std::to_string(i) + "]"));
  return m;
}

inline StreamModelSpec parse_model(const nlohmann::json& j, const std::string& path) {
  expect_object(j, path);
  const std::string kind = as_string(require_field(j, "kind", path), path + ".kind");
  StreamModelSpec spec;
  if (kind == "bernoulli") {
    reject_unknown_keys(j, path, {"kind", "p", "p0", "p1"});
    BernoulliBatterySpec b;
    b.p = as_number_array(require_field(j, "p", path), path + ".p");
    if (const auto* f = find_field(j, "p0")) b.p0 = as_number(*f, path + ".p0");
    if (const auto* f = find_field(j, "p1")) b.p1 = as_number(*f, path + ".p1");
    spec.model = std::move(b);
  } else if (kind == "normal") {
    reject_unknown_keys(j, path, {"kind", "theta", "cov", "theta0", "delta"});
    CorrelatedNormalSpec n;
    n.theta = as_number_array(require_field(j, "theta", path), path + ".theta");
    n.cov = as_matrix(require_field(j, "cov", path), path + ".cov");
    if (const auto* f = find_field(j, "theta0")) n.theta0 = as_number(*f, path + ".theta0");
    if (const auto* f = find_field(j, "delta")) n.delta = as_number(*f, path + ".delta");
    spec.model = std::move(n);
  } else {
    config_fail(path + ".kind", "unknown kind '" + kind + "' (expected bernoulli or normal)");
  }
  return spec;
}

}  // namespace detail

// Parses one scenario object into an ExperimentConfig. Diagnostics name the
// offending field as `<path>.<field>: <problem>`.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::string& path) {
  detail::expect_object(j, path);
  detail::reject_unknown_keys(j, path,
                              {"name", "model", "alpha", "beta", "rho", "replications", "seed",
                               "schedule_step", "variant", "truncation", "fbh_n", "cap", "note"});
  ExperimentConfig cfg;
  cfg.name = detail::as_string(detail::require_field(j, "name", path), path + ".name");
  cfg.model = detail::parse_model(detail::require_field(j, "model", path), path + ".model");
  cfg.alpha = detail::as_number(detail::require_field(j, "alpha", path), path + ".alpha");
  cfg.beta = detail::as_number(detail::require_field(j, "beta", path), path + ".beta");
  if (const auto* f = detail::find_field(j, "rho"))
    cfg.rho = detail::as_number(*f, path + ".rho");
  if (const auto* f = detail::find_field(j, "replications"))
    cfg.replications = detail::as_integer(*f, path + ".replications");
  if (const auto* f = detail::find_field(j, "seed")) {
    const long long s = detail::as_integer(*f, path + ".seed");
    if (s < 0) detail::config_fail(path + ".seed", "expected a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (const auto* f = detail::find_field(j, "schedule_step"))
    cfg.schedule_step = detail::as_integer(*f, path + ".schedule_step");
  if (const auto* f = detail::find_field(j, "variant")) {
    const std::string v = detail::as_string(*f, path + ".variant");
    if (v == "full")
      cfg.variant = Variant::full;
    else if (v == "rejective")
      cfg.variant = Variant::rejective;
    else
      detail::config_fail(path + ".variant", "expected 'full' or 'rejective', got '" + v + "'");
  }
  if (const auto* f = detail::find_field(j, "truncation"))
    cfg.truncation = detail::as_integer(*f, path + ".truncation");
  if (const auto* f = detail::find_field(j, "fbh_n"))
    cfg.fbh_n = detail::as_integer(*f, path + ".fbh_n");
  if (const auto* f = detail::find_field(j, "cap"))
    cfg.cap = detail::as_integer(*f, path + ".cap");
  if (const auto* f = detail::find_field(j, "note"))
    cfg.note = detail::as_string(*f, path + ".note");

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    detail::config_fail(path, e.what());
  }
  return cfg;
}

// Parses a scenarios document: an object with a `scenarios` array. An empty
// array is legal and yields no work.
inline std::vector<ExperimentConfig> parse_scenarios(const nlohmann::json& doc) {
  detail::expect_object(doc, "config");
  detail::reject_unknown_keys(doc, "config", {"scenarios"});
  const auto& arr = detail::require_field(doc, "scenarios", "config");
  if (!arr.is_array()) detail::config_fail("config.scenarios", "expected an array");
  std::vector<ExperimentConfig> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(parse_experiment_config(arr[i], "scenarios[" + std::to_string(i) + "]"));
  return out;
}

// Reads and parses a scenarios document from a stream; JSON syntax errors are
// reported as config errors with the parser's position information.
inline std::vector<ExperimentConfig> load_scenarios(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return parse_scenarios(doc);
}

}  // namespace seqbh
