// wbt: command-line front end.
//
//   wbt solve-alpha -c cfg.json
//   wbt simulate    -c cfg.json [--force]
//   wbt analyze     -c cfg.json --batch out/batch.csv [--compare other.csv]
//   wbt verify      -c cfg.json
//
// Exit codes: 0 ok, 1 operational error, 2 condition failure, 3 failed
// verification.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wbt/batch_io.hpp"
#include "wbt/config.hpp"
#include "wbt/constants.hpp"
#include "wbt/cramer.hpp"
#include "wbt/engine.hpp"
#include "wbt/moments.hpp"
#include "wbt/renewal.hpp"
#include "wbt/tails.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wbt;

namespace {

enum Exit { kOk = 0, kOperational = 1, kConditionFailure = 2, kVerificationFailure = 3 };

json header(const char* command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"generated_at", utc_timestamp()}};
}

json error_json(const Error& e) { return {{"kind", to_string(e.kind())}, {"message", e.what()}}; }

VectorModel require_model(const RunConfig& c) {
  if (!c.model) throw Error(ErrorKind::invalid_config, "config has no model section");
  return make_model(*c.model, c.kind);
}

std::string emit(const fs::path& dir, const std::string& name, const json& j) {
  const auto path = (dir / name).string();
  write_json(path, j);
  std::cout << "wrote " << path << '\n';
  return path;
}

void print_failed_conditions(const ConditionReport& r) {
  for (const auto& e : r.entries)
    if (e.status != CheckStatus::pass)
      std::cerr << "condition " << e.name << ": " << to_string(e.status)
                << (e.note.empty() ? "" : " (" + e.note + ")") << '\n';
}

int cmd_solve_alpha(const RunConfig& c, const fs::path& out) {
  const auto m = require_model(c);
  auto j = header("solve-alpha");
  j["model"] = m.source;
  j["model_hash"] = hash_hex(model_hash(m));
  j["kind"] = to_string(c.kind);
  int code = kOk;
  try {
    const auto sol = solve_alpha(m, c.bracket, c.tol);
    j["solution"] = to_json(sol);
    if (c.kind == RecursionKind::generation) {
      j["conditions"] = "not-applicable";
    } else {
      const auto rep = check_conditions(m, sol, c.kind, c.epsilon);
      j["conditions"] = to_json(rep);
      if (!rep.passed()) {
        print_failed_conditions(rep);
        code = kConditionFailure;
      }
    }
  } catch (const ContractionRootError& e) {
    j["solution"] = to_json(e.solution);
    j["error"] = error_json(e);
    std::cerr << "error: " << e.what() << '\n';
    code = kOperational;
  } catch (const Error& e) {
    j["error"] = error_json(e);
    std::cerr << "error: " << e.what() << '\n';
    code = kOperational;
  }
  emit(out, "solve.json", j);
  return code;
}

int cmd_simulate(const RunConfig& c, const fs::path& out, bool force) {
  const auto m = require_model(c);
  std::optional<CramerSolution> sol;
  if (c.kind != RecursionKind::generation) {
    if (force) {
      try {
        sol = solve_alpha(m, c.bracket, c.tol);
      } catch (const Error&) {
      }
    } else {
      sol = solve_alpha(m, c.bracket, c.tol);
      const auto rep = check_conditions(m, *sol, c.kind, c.epsilon);
      if (!rep.passed()) {
        print_failed_conditions(rep);
        std::cerr << "conditions failed; rerun with --force to simulate anyway\n";
        return kConditionFailure;
      }
    }
  }

  SampleOptions opt;
  opt.kind = c.kind;
  opt.depth = c.depth;
  opt.budget = c.budget;
  const auto batch = run_batch(m, opt, c.reps, c.seed, c.workers);

  const auto csv = (out / "batch.csv").string();
  write_batch_csv(csv, batch);
  std::cout << "wrote " << csv << '\n';

  auto j = header("simulate");
  j["model"] = m.source;
  j["batch"] = batch_summary(batch);
  if (sol) j["alpha"] = sol->alpha;
  if (c.depth) {
    auto t = to_json(truncation_bound(m, c.truncation_beta, *c.depth, c.kind));
    t["beta"] = c.truncation_beta;
    j["truncation_bound"] = t;
  } else {
    j["truncation_bound"] = "exact";
  }
  emit(out, "summary.json", j);
  return kOk;
}

json tail_report(const std::vector<double>& sorted, const RunConfig& c, double plateau_alpha,
                 const char* alpha_source, const fs::path& out) {
  json t;
  const std::size_t n = sorted.size();
  t["n"] = n;
  try {
    const std::size_t k = std::min(c.tails.k.value_or(default_hill_k(n)), n - 1);
    const auto h = hill_estimator(sorted, k);
    t["alpha_hat"] = estimate_json(h);
    t["k_used"] = k;
    if (!(plateau_alpha > 0.0)) plateau_alpha = h.value;
  } catch (const Error& e) {
    t["alpha_hat"] = "n/a";
    t["alpha_hat_error"] = error_json(e);
  }

  const auto sweep = hill_sweep(sorted, 20, c.tails.hill_drift_threshold);
  t["stability"] = {{"hill_drift", sweep.drift}, {"hill_plot_unstable", sweep.unstable}};
  {
    const auto path = (out / "hill_sweep.csv").string();
    std::ofstream f(path, std::ios::binary);
    f << "k,alpha_hat,std_error\n";
    for (const auto& p : sweep.points)
      f << p.k << ',' << format_double(p.alpha.value) << ',' << format_double(p.alpha.std_error) << '\n';
    std::cout << "wrote " << path << '\n';
  }

  if (plateau_alpha > 0.0) {
    try {
      const auto p = plateau_H(sorted, plateau_alpha, c.tails.q_lo, c.tails.q_hi, c.tails.bootstrap, c.seed);
      t["plateau_H"] = to_json(p);
      t["plateau_H"]["alpha"] = plateau_alpha;
      t["plateau_H"]["alpha_source"] = alpha_source;
      t["plateau_H"]["quantile_band"] = {c.tails.q_lo, c.tails.q_hi};
    } catch (const Error& e) {
      t["plateau_H"] = {{"status", "unavailable"}, {"error", error_json(e)}};
    }
  } else {
    t["plateau_H"] = "n/a";
  }

  const auto grid = log_grid(sorted, 60);
  const auto surv = survival_points(sorted, grid);
  json pts = json::array();
  {
    const auto path = (out / "survival.csv").string();
    std::ofstream f(path, std::ios::binary);
    f << "t,survival,std_error\n";
    for (const auto& s : surv) {
      f << format_double(s.t) << ',' << format_double(s.fraction) << ',' << format_double(s.std_error) << '\n';
      pts.push_back({s.t, s.fraction});
    }
    std::cout << "wrote " << path << '\n';
  }
  t["survival_points"] = pts;
  return t;
}

int cmd_analyze(const RunConfig& c, const fs::path& out, const std::string& batch_path,
                const std::string& compare_path) {
  const auto batch = read_batch_csv(batch_path);
  const auto sorted = sorted_copy(batch.values);

  auto kind = c.kind;
  bool iterated = false;
  if (auto it = batch.meta.find("kind"); it != batch.meta.end()) {
    std::string k = it->second;
    if (k.rfind("iterate-from:", 0) == 0) {
      iterated = true;
      k = k.substr(13);
    }
    kind = parse_recursion_kind(k);
  }

  // Model-based routes need the batch to come from the configured model.
  std::optional<VectorModel> model;
  std::optional<CramerSolution> sol;
  std::string model_note;
  if (!c.model) {
    model_note = "no model section";
  } else {
    auto m = make_model(*c.model);
    const auto hash = batch.meta.find("model_hash");
    if (hash == batch.meta.end() || hash->second != hash_hex(model_hash(m))) {
      model_note = "batch was not produced by the configured model";
    } else {
      model = std::move(m);
      try {
        sol = solve_alpha(*model, c.bracket, c.tol);
      } catch (const Error& e) {
        model_note = e.what();
      }
    }
  }

  auto j = header("analyze");
  j["batch"] = {{"meta", batch.meta}, {"values", batch.values.size()}};
  j["tail_report"] = tail_report(sorted, c, sol ? sol->alpha : 0.0, sol ? "cramer-root" : "hill", out);

  if (!compare_path.empty()) {
    const auto other = read_batch_csv(compare_path);
    const auto s = stability_diagnostic(batch.values, other.values, c.tails.ks_threshold);
    j["tail_report"]["stability"]["depth_ks"] = s.ks;
    j["tail_report"]["stability"]["depth_ks_threshold"] = s.threshold;
    j["tail_report"]["stability"]["depth_ks_pass"] = s.pass;
  }

  if (model && sol && !iterated && kind != RecursionKind::generation) {
    HReport h;
    h.kind = kind;
    h.alpha = sol->alpha;
    try {
      h.closed_form = h_closed_form(*model, sol->alpha, kind);
    } catch (const Error&) {
    }
    try {
      h.mc_general = h_mc_general(*model, *sol, kind, batch.values, c.h_reps, c.seed);
    } catch (const Error& e) {
      model_note = e.what();
    }
    std::optional<double> r_moment;
    if (kind == RecursionKind::homogeneous) {
      const double p = std::ceil(sol->alpha);
      std::vector<double> powered(batch.values.size());
      for (std::size_t i = 0; i < powered.size(); ++i) powered[i] = std::pow(batch.values[i], p - 1.0);
      r_moment = mean_estimate(powered).value;
    }
    h.bounds = h_bounds(*model, *sol, kind, r_moment);
    j["h_report"] = to_json(h);
    j["conditions"] = to_json(check_conditions(*model, *sol, kind, c.epsilon));
  } else {
    j["h_report"] = "n/a";
  }
  if (!model_note.empty()) j["model_note"] = model_note;
  emit(out, "analysis.json", j);
  return kOk;
}

int cmd_verify(const RunConfig& c, const fs::path& out) {
  const auto m = require_model(c);
  const auto& v = c.verify;
  auto j = header("verify");
  j["model"] = m.source;
  j["kind"] = to_string(c.kind);
  bool ok = true;

  std::optional<CramerSolution> sol;
  try {
    sol = solve_alpha(m, c.bracket, c.tol);
    j["alpha"] = sol->alpha;
  } catch (const Error& e) {
    j["alpha"] = error_json(e);
  }

  if (!v.renewal) {
    j["renewal"] = "disabled";
  } else if (!sol) {
    j["renewal"] = "not-applicable: no Cramer root";
  } else {
    json cells = json::array();
    for (unsigned n : v.renewal_n)
      for (const auto& name : v.renewal_functions) {
        const auto g = parse_test_function(name);
        const auto r = verify_product_measure(m, sol->alpha, n, g, v.renewal_reps,
                                              combine_keys(c.seed, 16 * n + static_cast<unsigned>(g)),
                                              v.renewal_x, c.workers);
        ok = ok && r.agree;
        cells.push_back(to_json(r));
      }
    j["renewal"] = cells;
  }

  if (!v.moments) {
    j["moments"] = "disabled";
  } else {
    GridOptions g;
    g.betas = v.moment_betas;
    g.max_depth = v.moment_max_depth;
    g.reps = v.moment_reps;
    g.seed = c.seed;
    g.workers = c.workers;
    g.k_factor = v.k_factor;
    const Marks marks = c.kind == RecursionKind::homogeneous ? Marks::unit : Marks::model;
    json cells = json::array();
    std::size_t checked = 0, held = 0, skipped = 0;
    for (const auto& r : moment_grid(m, marks, g)) {
      if (r.bound.applicable) {
        ++checked;
        held += r.holds ? 1 : 0;
        ok = ok && r.holds;
      } else {
        ++skipped;
      }
      cells.push_back(to_json(r));
    }
    j["moments"] = {{"marks", marks == Marks::unit ? "unit" : "model"},
                    {"checked", checked},
                    {"held", held},
                    {"precondition_unmet", skipped},
                    {"cells", cells}};
  }

  if (!v.iteration) {
    j["iteration"] = "disabled";
  } else if (c.kind != RecursionKind::linear && c.kind != RecursionKind::max) {
    j["iteration"] = "not-applicable";
  } else {
    const auto a = iterate_from(m, c.kind, Constant{0.0}, v.iteration_n, v.iteration_reps, c.seed, c.workers, c.budget);
    const auto b = iterate_from(m, c.kind, Constant{v.iteration_r0}, v.iteration_n, v.iteration_reps, c.seed,
                                c.workers, c.budget);
    const auto s = stability_diagnostic(a.values, b.values, v.iteration_ks);
    ok = ok && s.pass;
    j["iteration"] = {{"n", v.iteration_n},
                      {"r0", {0.0, v.iteration_r0}},
                      {"reps", v.iteration_reps},
                      {"ks", s.ks},
                      {"threshold", s.threshold},
                      {"pass", s.pass}};
  }

  j["passed"] = ok;
  emit(out, "verify.json", j);
  if (!ok) std::cerr << "verification failed; see verify.json\n";
  return ok ? kOk : kVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of fixed-point equations on weighted branching trees"};
  app.require_subcommand(1);
  std::string config_path, out_dir, batch_path, compare_path;
  std::vector<std::string> overrides;
  bool force = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("--set", overrides, "override a config leaf, key.path=value (repeatable)");
    sub->add_option("-o,--out", out_dir, "output directory");
  };
  auto* solve = app.add_subcommand("solve-alpha", "solve phi(alpha) = 1 and check the tail hypotheses");
  auto* simulate = app.add_subcommand("simulate", "sample a batch");
  auto* analyze = app.add_subcommand("analyze", "tail index, plateau and H estimates of a batch");
  auto* verify = app.add_subcommand("verify", "renewal duality, moment bounds and iteration checks");
  for (auto* sub : {solve, simulate, analyze, verify}) common(sub);
  simulate->add_flag("--force", force, "simulate even when the conditions fail");
  analyze->add_option("--batch", batch_path, "batch CSV")->required();
  analyze->add_option("--compare", compare_path, "second batch for the depth KS diagnostic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kOperational;
  }

  try {
    const auto cfg = load_config_file(config_path, overrides);
    const fs::path out =
        resolve_output_dir(cfg, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir));
    fs::create_directories(out);
    if (solve->parsed()) return cmd_solve_alpha(cfg, out);
    if (simulate->parsed()) return cmd_simulate(cfg, out, force);
    if (analyze->parsed()) return cmd_analyze(cfg, out, batch_path, compare_path);
    if (verify->parsed()) return cmd_verify(cfg, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOperational;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOperational;
  }
  return kOperational;
}
