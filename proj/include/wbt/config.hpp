#pragma once

// Run configuration. The defaults document doubles as the schema: a config
// file or --set override may only name keys that exist in it, so typos fail
// loudly. The model section is validated separately by make_model.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/cramer.hpp"
#include "wbt/error.hpp"
#include "wbt/model.hpp"
#include "wbt/renewal.hpp"

namespace wbt {

inline constexpr int kSchemaVersion = 1;

inline nlohmann::json default_config() {
  return nlohmann::json::parse(R"({
    "schema_version": 1,
    "model": null,
    "kind": "linear",
    "depth": "exact",
    "reps": 10000,
    "seed": 1,
    "workers": 1,
    "budget": 10000000,
    "solver": {"bracket": [0.1, 8.0], "tol": 1e-12, "epsilon": 0.5},
    "tails": {"k": null, "quantile_band": [0.99, 0.9995], "bootstrap": 200,
              "hill_drift_threshold": 0.2, "ks_threshold": 0.02},
    "constants": {"reps": 100000},
    "truncation": {"beta": 0.5},
    "verify": {
      "renewal": {"enabled": true, "n": [1, 2, 3],
                  "functions": ["constant-1", "identity-u", "indicator"],
                  "x": 0.0, "reps": 1000000},
      "moments": {"enabled": true, "betas": [0.25, 0.5, 0.847, 1.0, 1.5, 2.0],
                  "max_depth": 10, "reps": 100000, "k_factor": 1.0},
      "iteration": {"enabled": true, "n": 15, "r0": 100.0, "reps": 100000,
                    "ks_threshold": 0.01}
    },
    "output_dir": null
  })");
}

struct TailSettings {
  std::optional<std::size_t> k;
  double q_lo = 0.99;
  double q_hi = 0.9995;
  std::size_t bootstrap = 200;
  double hill_drift_threshold = 0.2;
  double ks_threshold = 0.02;
};

struct VerifySettings {
  bool renewal = true;
  std::vector<unsigned> renewal_n;
  std::vector<std::string> renewal_functions;
  double renewal_x = 0.0;
  std::size_t renewal_reps = 0;
  bool moments = true;
  std::vector<double> moment_betas;
  unsigned moment_max_depth = 10;
  std::size_t moment_reps = 0;
  double k_factor = 1.0;
  bool iteration = true;
  unsigned iteration_n = 15;
  double iteration_r0 = 100.0;
  std::size_t iteration_reps = 0;
  double iteration_ks = 0.01;
};

struct RunConfig {
  std::optional<nlohmann::json> model;
  RecursionKind kind = RecursionKind::linear;
  std::optional<unsigned> depth;  // nullopt: exact
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::uint64_t budget = 0;
  Bracket bracket;
  double tol = 1e-12;
  double epsilon = 0.5;
  TailSettings tails;
  std::size_t h_reps = 0;
  double truncation_beta = 0.5;
  VerifySettings verify;
  std::optional<std::string> output_dir;
  nlohmann::json resolved;  // merged document, echoed into reports
};

namespace detail {

// Merges `src` into `dst`, rejecting keys absent from `schema`.
inline void merge_checked(nlohmann::json& dst, const nlohmann::json& src, const nlohmann::json& schema,
                          const std::string& where) {
  if (!src.is_object()) throw Error(ErrorKind::invalid_config, where + " must be an object");
  for (const auto& item : src.items()) {
    const std::string path = where.empty() ? item.key() : where + "." + item.key();
    if (!schema.contains(item.key())) throw Error(ErrorKind::invalid_config, "unknown key '" + path + "'");
    const auto& s = schema.at(item.key());
    if (s.is_object())
      merge_checked(dst[item.key()], item.value(), s, path);
    else
      dst[item.key()] = item.value();
  }
}

template <class T>
T get_as(const nlohmann::json& doc, const nlohmann::json::json_pointer& ptr) {
  try {
    return doc.at(ptr).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::invalid_config, "config value at '" + ptr.to_string() + "' has the wrong type");
  }
}

inline nlohmann::json parse_override_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return text;
  }
}

}  // namespace detail

/// Applies "a.b.c=value" to `doc`. Paths below "model" are passed through;
/// any other path must exist in the defaults.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::invalid_config, "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const auto value = detail::parse_override_value(assignment.substr(eq + 1));
  std::string pointer;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::invalid_config, "empty segment in '" + key + "'");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const nlohmann::json::json_pointer ptr(pointer);
  const bool in_model = key == "model" || key.rfind("model.", 0) == 0;
  const auto defaults = default_config();
  if (!in_model && !defaults.contains(ptr))
    throw Error(ErrorKind::invalid_config, "unknown key '" + key + "'");
  if (in_model && key != "model" && !doc["model"].is_object())
    throw Error(ErrorKind::invalid_config, "cannot override '" + key + "' without a model section");
  doc[ptr] = value;
}

/// Builds the config: defaults, then the file, then overrides.
inline RunConfig load_config(const nlohmann::json& file, const std::vector<std::string>& overrides = {}) {
  using ptr = nlohmann::json::json_pointer;
  auto doc = default_config();
  const auto schema = default_config();
  if (!file.is_null()) {
    auto body = file;
    nlohmann::json model;
    if (body.is_object() && body.contains("model")) {
      model = body.at("model");
      body.erase("model");
    }
    detail::merge_checked(doc, body, schema, "");
    doc["model"] = model;
  }
  for (const auto& o : overrides) apply_override(doc, o);

  if (detail::get_as<int>(doc, ptr("/schema_version")) != kSchemaVersion)
    throw Error(ErrorKind::invalid_config, "unsupported schema_version");

  RunConfig c;
  c.resolved = doc;
  if (!doc.at("model").is_null()) c.model = doc.at("model");
  c.kind = parse_recursion_kind(detail::get_as<std::string>(doc, ptr("/kind")));
  const auto& depth = doc.at("depth");
  if (depth.is_string()) {
    if (depth.get<std::string>() != "exact")
      throw Error(ErrorKind::invalid_config, "depth must be a nonnegative integer or \"exact\"");
  } else {
    const auto d = detail::get_as<long long>(doc, ptr("/depth"));
    if (d < 0 || d > 100000) throw Error(ErrorKind::invalid_config, "depth out of range");
    c.depth = static_cast<unsigned>(d);
  }
  auto positive = [&](const char* p) {
    const auto v = detail::get_as<long long>(doc, ptr(p));
    if (v < 1) throw Error(ErrorKind::invalid_config, std::string(p) + " must be >= 1");
    return static_cast<std::uint64_t>(v);
  };
  c.reps = positive("/reps");
  c.seed = detail::get_as<std::uint64_t>(doc, ptr("/seed"));
  c.workers = static_cast<unsigned>(positive("/workers"));
  c.budget = positive("/budget");

  const auto bracket = detail::get_as<std::vector<double>>(doc, ptr("/solver/bracket"));
  if (bracket.size() != 2) throw Error(ErrorKind::invalid_config, "solver.bracket needs two numbers");
  c.bracket = {bracket[0], bracket[1]};
  c.tol = detail::get_as<double>(doc, ptr("/solver/tol"));
  c.epsilon = detail::get_as<double>(doc, ptr("/solver/epsilon"));

  if (!doc.at(ptr("/tails/k")).is_null()) c.tails.k = detail::get_as<std::size_t>(doc, ptr("/tails/k"));
  const auto band = detail::get_as<std::vector<double>>(doc, ptr("/tails/quantile_band"));
  if (band.size() != 2) throw Error(ErrorKind::invalid_config, "tails.quantile_band needs two numbers");
  c.tails.q_lo = band[0];
  c.tails.q_hi = band[1];
  c.tails.bootstrap = detail::get_as<std::size_t>(doc, ptr("/tails/bootstrap"));
  c.tails.hill_drift_threshold = detail::get_as<double>(doc, ptr("/tails/hill_drift_threshold"));
  c.tails.ks_threshold = detail::get_as<double>(doc, ptr("/tails/ks_threshold"));
  c.h_reps = positive("/constants/reps");
  c.truncation_beta = detail::get_as<double>(doc, ptr("/truncation/beta"));

  auto& v = c.verify;
  v.renewal = detail::get_as<bool>(doc, ptr("/verify/renewal/enabled"));
  v.renewal_n = detail::get_as<std::vector<unsigned>>(doc, ptr("/verify/renewal/n"));
  v.renewal_functions = detail::get_as<std::vector<std::string>>(doc, ptr("/verify/renewal/functions"));
  v.renewal_x = detail::get_as<double>(doc, ptr("/verify/renewal/x"));
  v.renewal_reps = positive("/verify/renewal/reps");
  v.moments = detail::get_as<bool>(doc, ptr("/verify/moments/enabled"));
  v.moment_betas = detail::get_as<std::vector<double>>(doc, ptr("/verify/moments/betas"));
  v.moment_max_depth = detail::get_as<unsigned>(doc, ptr("/verify/moments/max_depth"));
  v.moment_reps = positive("/verify/moments/reps");
  v.k_factor = detail::get_as<double>(doc, ptr("/verify/moments/k_factor"));
  v.iteration = detail::get_as<bool>(doc, ptr("/verify/iteration/enabled"));
  v.iteration_n = static_cast<unsigned>(positive("/verify/iteration/n"));
  v.iteration_r0 = detail::get_as<double>(doc, ptr("/verify/iteration/r0"));
  v.iteration_reps = positive("/verify/iteration/reps");
  v.iteration_ks = detail::get_as<double>(doc, ptr("/verify/iteration/ks_threshold"));
  for (const auto& f : v.renewal_functions) (void)parse_test_function(f);

  if (!doc.at("output_dir").is_null()) c.output_dir = detail::get_as<std::string>(doc, ptr("/output_dir"));
  return c;
}

inline RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  nlohmann::json file;
  try {
    file = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::invalid_config, "config '" + path + "': " + e.what());
  }
  return load_config(file, overrides);
}

/// --out flag, then the config file, then WBT_OUTPUT_DIR, then "wbt-out".
inline std::string resolve_output_dir(const RunConfig& c, const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (c.output_dir) return *c.output_dir;
  if (const char* env = std::getenv("WBT_OUTPUT_DIR"); env && *env) return env;
  return "wbt-out";
}

}  // namespace wbt
