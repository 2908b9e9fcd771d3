#pragma once

// Exact moment identities and Monte Carlo checks of the moment bounds.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/engine.hpp"
#include "wbt/model.hpp"
#include "wbt/moment_bounds.hpp"
#include "wbt/stats.hpp"
#include "wbt/tails.hpp"

namespace wbt {

/// E[W_n] = E[Q] rho^n.
inline double mean_wn_exact(const VectorModel& m, unsigned n, Marks marks = Marks::model) {
  return mark_moment(m, 1.0, marks) * std::pow(phi(m, 1.0).value, static_cast<double>(n));
}

/// E[R] = E[Q] / (1 - rho), infinite when rho >= 1.
inline MomentValue exact_mean_R(const VectorModel& m) {
  const double rho = phi(m, 1.0).value;
  if (!(rho < 1.0)) return MomentValue::infinite();
  return MomentValue::closed(mark_moment(m, 1.0) / (1.0 - rho));
}

struct MomentEstimate {
  Estimate estimate;
  std::optional<double> alpha_hat;
  bool unreliable = false;  // beta at or beyond the estimated tail index
};

/// Empirical E[X^beta] with a grouped jackknife SE. With at least 1000
/// positive values the Hill index is estimated and moments of order
/// beta >= alpha-hat are flagged.
inline MomentEstimate estimate_moment(std::span<const double> values, double beta,
                                      std::size_t groups = 100) {
  if (values.empty()) throw Error(ErrorKind::invalid_parameter, "empty batch");
  std::vector<double> powered(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) powered[i] = std::pow(values[i], beta);
  MomentEstimate out;
  out.estimate = grouped_jackknife_mean(powered, groups);
  const auto sorted = sorted_copy(values);
  const auto positive = static_cast<std::size_t>(
      sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), 0.0));
  if (positive >= 1000) {
    const std::size_t k = std::min(default_hill_k(sorted.size()), positive - 1);
    try {
      const auto a = hill_estimator(sorted, k);
      out.alpha_hat = a.value;
      out.unreliable = beta >= a.value;
    } catch (const Error&) {
      // constant tails: no index to compare against
    }
  }
  return out;
}

struct MomentReport {
  std::string target;  // W_n, R or R^(n)
  double beta = 0.0;
  unsigned n = 0;
  Estimate estimate;
  BoundValue bound;
  bool holds = false;
  bool unreliable = false;
};

inline nlohmann::json to_json(const MomentReport& r) {
  nlohmann::json j{{"target", r.target},
                   {"beta", r.beta},
                   {"n", r.n},
                   {"estimate", {{"value", r.estimate.value}, {"std_error", r.estimate.std_error}}},
                   {"bound", to_json(r.bound)}};
  if (r.bound.applicable)
    j["holds"] = r.holds;
  else
    j["status"] = "precondition-unmet";
  if (r.unreliable) j["heavy_tail_unreliable"] = true;
  return j;
}

/// Checks E[(sum C_i Y_i)^beta - sum (C_i Y_i)^beta] <= E[Y^(p-1)]^(beta/(p-1)) E[(sum C)^beta]
/// with Y drawn with replacement from `y`, p = ceil(beta).
inline MomentReport verify_sum_inequality(const VectorModel& m, double beta,
                                          std::span<const double> y, std::size_t reps,
                                          std::uint64_t seed) {
  if (!(beta > 1.0)) throw Error(ErrorKind::invalid_parameter, "sum inequality needs beta > 1");
  if (y.empty() || reps < 2) throw Error(ErrorKind::invalid_parameter, "empty Y batch or reps < 2");
  MomentReport rep;
  rep.target = "(sum C Y)^b - sum (C Y)^b";
  rep.beta = beta;
  std::vector<double> lhs(reps);
  std::uniform_int_distribution<std::size_t> pick(0, y.size() - 1);
  for (std::size_t r = 0; r < reps; ++r) {
    SplitMix64 eng(replication_key(seed, r));
    const NodeVector v = sample_vector(m, eng);
    double s = 0.0, parts = 0.0;
    for (double c : v.c) {
      const double cy = c * y[pick(eng)];
      s += cy;
      parts += std::pow(cy, beta);
    }
    lhs[r] = std::pow(s, beta) - parts;
  }
  rep.estimate = grouped_jackknife_mean(lhs);

  const double p = std::ceil(beta);
  std::vector<double> yp(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yp[i] = std::pow(y[i], p - 1.0);
  const Estimate ey = mean_estimate(yp);
  const auto sc = sum_moment(m, beta, reps, side_key(seed, 1));
  const double factor = std::pow(ey.value, beta / (p - 1.0));
  rep.bound.name = "E[Y^(p-1)]^(b/(p-1)) E[(sum C)^b]";
  rep.bound.value = factor * sc.value;
  // delta method for the product of the two estimated factors
  const double dfactor = beta / (p - 1.0) * std::pow(ey.value, beta / (p - 1.0) - 1.0) * ey.std_error;
  const double bound_se = std::hypot(dfactor * sc.value, factor * sc.std_error);
  rep.bound.note = sc.method == Method::closed_form ? "E[(sum C)^b] closed form" : "E[(sum C)^b] Monte Carlo";
  const double se = std::hypot(rep.estimate.std_error, bound_se);
  rep.holds = rep.estimate.value <= rep.bound.value + 3.0 * se + 1e-12;
  return rep;
}

struct GridOptions {
  std::vector<double> betas{0.25, 0.5, 0.847, 1.0, 1.5, 2.0};
  unsigned max_depth = 10;
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double k_factor = 1.0;  // test hook, see wn_moment_bound
};

/// E[W_n^beta] against its analytic bound over the (n, beta) grid. Cells
/// whose bound has unmet preconditions are reported and skipped.
inline std::vector<MomentReport> moment_grid(const VectorModel& m, Marks marks,
                                             const GridOptions& opt) {
  std::vector<MomentReport> out;
  SampleOptions so;
  so.kind = marks == Marks::unit ? RecursionKind::homogeneous : RecursionKind::generation;
  for (unsigned n = 0; n <= opt.max_depth; ++n) {
    so.depth = n;
    const auto batch = run_batch(m, so, opt.reps, combine_keys(opt.seed, n), opt.workers);
    for (double beta : opt.betas) {
      MomentReport r;
      r.target = "W_n";
      r.beta = beta;
      r.n = n;
      r.bound = wn_moment_bound(m, beta, n, marks, opt.k_factor);
      if (r.bound.applicable) {
        std::vector<double> powered(batch.values.size());
        for (std::size_t i = 0; i < powered.size(); ++i) powered[i] = std::pow(batch.values[i], beta);
        r.estimate = grouped_jackknife_mean(powered);
        const double slack = 1e-12 * std::max(1.0, r.bound.value);
        r.holds = r.estimate.value <= r.bound.value + 3.0 * r.estimate.std_error + slack;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace wbt
