#pragma once

// The tail constant H: closed forms for alpha in {1, 2}, the general Monte
// Carlo expression, and the one-sided bounds.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/cramer.hpp"
#include "wbt/model.hpp"
#include "wbt/moments.hpp"
#include "wbt/stats.hpp"

namespace wbt {

namespace detail {

inline bool near_integer(double a, double v) { return std::abs(a - v) <= 1e-9; }

}  // namespace detail

/// Closed-form H for integer alpha. Linear alpha = 1 and 2, homogeneous
/// alpha = 2. Component moments are expanded under the iid-independent
/// coupling, with E[R] from exact_mean_R.
inline double h_closed_form(const VectorModel& m, double alpha, RecursionKind kind) {
  const bool one = detail::near_integer(alpha, 1.0);
  const bool two = detail::near_integer(alpha, 2.0);
  const double ec = weight_moment(m, 1.0);
  const double pairs = 0.5 * count_factorial_moment2(m.count) * ec * ec;  // E[sum_{i<j} C_i C_j]
  if (kind == RecursionKind::linear) {
    if (one) return mark_moment(m, 1.0) / phi_prime(m, 1.0).value;
    if (two) {
      const auto er = exact_mean_R(m);
      if (!er.finite()) throw Error(ErrorKind::precondition, "closed form at alpha = 2 needs rho < 1");
      const double r = er.value;
      const double num = mark_moment(m, 2.0) + 2.0 * r * mark_moment(m, 1.0) * count_mean(m.count) * ec +
                         2.0 * r * r * pairs;
      return num / (2.0 * phi_prime(m, 2.0).value);
    }
  }
  if (kind == RecursionKind::homogeneous && two) return pairs / phi_prime(m, 2.0).value;
  throw Error(ErrorKind::unsupported, std::string("no closed form for kind ") + to_string(kind) +
                                          " at alpha = " + std::to_string(alpha));
}

struct HMcEstimate {
  Estimate estimate;
  bool heavy_tail_flag = false;
  std::size_t reps = 0;
};

/// General Monte Carlo form of H: E[integrand] / (alpha mu), where the
/// integrand is the kind's right-hand side to the power alpha minus
/// sum (C_i R_i)^alpha, with R_i resampled from `r_values`.
///
/// The replications are split into `groups` blocks and block g resamples R
/// only from block g of the batch, so the jackknife SE over blocks carries
/// the batch uncertainty as well. At alpha = 1 the linear and homogeneous
/// integrands reduce to Q and 0 and are evaluated that way.
inline HMcEstimate h_mc_general(const VectorModel& m, const CramerSolution& sol, RecursionKind kind,
                                std::span<const double> r_values, std::size_t reps,
                                std::uint64_t seed, std::size_t groups = 100) {
  if (kind == RecursionKind::generation)
    throw Error(ErrorKind::unsupported, "H is not defined for the generation kind");
  if (reps < 2) throw Error(ErrorKind::invalid_parameter, "h_mc_general needs reps >= 2");
  if (r_values.size() < groups) throw Error(ErrorKind::invalid_parameter, "R batch smaller than group count");
  const double a = sol.alpha;
  const double denom = a * sol.mu;
  const bool linear_like = kind == RecursionKind::linear || kind == RecursionKind::homogeneous;
  const bool reduce = linear_like && detail::near_integer(a, 1.0);

  groups = std::min(groups, reps);
  std::vector<double> group_mean(groups);
  std::vector<std::size_t> group_size(groups);
  double largest = 0.0, total = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t r_lo = g * r_values.size() / groups;
    const std::size_t r_hi = (g + 1) * r_values.size() / groups;
    std::uniform_int_distribution<std::size_t> pick(r_lo, r_hi - 1);
    const std::size_t lo = g * reps / groups, hi = (g + 1) * reps / groups;
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      SplitMix64 eng(replication_key(seed, i));
      const NodeVector v = sample_vector(m, eng);
      const double q = kind == RecursionKind::homogeneous ? 0.0 : v.q;
      double term;
      if (reduce) {
        term = q;
      } else {
        double s = 0.0, mx = 0.0, parts = 0.0;
        for (double c : v.c) {
          const double cr = c * r_values[pick(eng)];
          s += cr;
          mx = std::max(mx, cr);
          parts += std::pow(cr, a);
        }
        double lead = 0.0;
        switch (kind) {
          case RecursionKind::linear: lead = std::pow(s + q, a); break;
          case RecursionKind::homogeneous: lead = std::pow(s, a); break;
          case RecursionKind::max: lead = std::max(std::pow(mx, a), std::pow(q, a)); break;
          case RecursionKind::max_plus: lead = std::pow(mx + q, a); break;
          case RecursionKind::generation: break;
        }
        term = lead - parts;
      }
      sum += term;
      total += std::abs(term);
      largest = std::max(largest, std::abs(term));
    }
    group_size[g] = hi - lo;
    group_mean[g] = sum / static_cast<double>(hi - lo) / denom;
  }
  HMcEstimate out;
  out.reps = reps;
  out.estimate = group_means_estimate(group_mean, group_size);
  out.heavy_tail_flag = a >= 2.0 && total > 0.0 && largest > 0.05 * total;
  return out;
}

struct HBounds {
  std::optional<double> lower;
  std::optional<double> upper;
  std::string note;
};

/// (E[R^(p-1)])^(alpha/(p-1)) E[(sum C)^alpha] / (alpha mu), p = ceil(alpha),
/// for the homogeneous equation; `r_moment` is E[R^(p-1)].
inline double homogeneous_upper_bound(const VectorModel& m, double alpha, double mu, double r_moment) {
  const double p = std::ceil(alpha);
  if (p < 2.0) throw Error(ErrorKind::precondition, "homogeneous bound needs alpha > 1");
  return std::pow(r_moment, alpha / (p - 1.0)) * sum_moment_bound(m, alpha).value / (alpha * mu);
}

/// Bounds on H. Linear: lower E[Q^alpha]/(alpha mu) for alpha >= 1, upper the
/// same for alpha <= 1. Homogeneous with non-integer alpha: the upper bound
/// above, when an estimate of E[R^(p-1)] is given.
inline HBounds h_bounds(const VectorModel& m, const CramerSolution& sol, RecursionKind kind,
                        std::optional<double> r_moment = std::nullopt) {
  HBounds b;
  const double a = sol.alpha;
  if (kind == RecursionKind::linear) {
    const double v = mark_moment(m, a) / (a * sol.mu);
    if (a >= 1.0 - 1e-9) b.lower = v;
    if (a <= 1.0 + 1e-9) b.upper = v;
  } else if (kind == RecursionKind::homogeneous) {
    if (a > 1.0 && !detail::near_integer(a, std::round(a))) {
      if (r_moment)
        b.upper = homogeneous_upper_bound(m, a, sol.mu, *r_moment);
      else
        b.note = "upper bound needs E[R^(p-1)] from a batch";
    }
  } else {
    b.note = "no bounds for this kind";
  }
  return b;
}

struct HReport {
  RecursionKind kind = RecursionKind::linear;
  double alpha = 0.0;
  std::optional<double> closed_form;
  std::optional<HMcEstimate> mc_general;
  HBounds bounds;
};

inline nlohmann::json to_json(const HReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    if (v) return *v;
    return "n/a";
  };
  nlohmann::json j{{"kind", to_string(r.kind)},
                   {"alpha", r.alpha},
                   {"closed_form", opt(r.closed_form)},
                   {"lower_bound", opt(r.bounds.lower)},
                   {"upper_bound", opt(r.bounds.upper)}};
  if (r.mc_general) {
    j["mc_general"] = {{"value", r.mc_general->estimate.value},
                       {"std_error", r.mc_general->estimate.std_error},
                       {"reps", r.mc_general->reps}};
    if (r.mc_general->heavy_tail_flag) j["mc_general"]["heavy_tail_flag"] = true;
  } else {
    j["mc_general"] = "n/a";
  }
  if (!r.bounds.note.empty()) j["bounds_note"] = r.bounds.note;
  return j;
}

}  // namespace wbt
