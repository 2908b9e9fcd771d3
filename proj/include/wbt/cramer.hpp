#pragma once

// Cramér root of phi(theta) = 1 and the power-tail hypothesis checks.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/error.hpp"
#include "wbt/model.hpp"

namespace wbt {

struct Bracket {
  double lo = 0.1;
  double hi = 8.0;
};

enum class RootKind { unique_root, second_root_of_critical_pair };

inline const char* to_string(RootKind k) {
  return k == RootKind::unique_root ? "unique-root" : "second-root-of-critical-pair";
}

struct CramerSolution {
  double alpha = 0.0;
  double mu = 0.0;  // phi'(alpha)
  double residual = 0.0;
  RootKind root_kind = RootKind::unique_root;
  Bracket bracket;
  int iterations = 0;
};

// Thrown when the located root has phi'(alpha) <= 0. The root is still
// reported; it is simply not a Cramér root with a power tail.
class ContractionRootError : public Error {
 public:
  explicit ContractionRootError(CramerSolution s)
      : Error(ErrorKind::contraction_root,
              "phi'(alpha) = " + std::to_string(s.mu) + " <= 0 at alpha = " +
                  std::to_string(s.alpha) + " (no power tail)"),
        solution(s) {}
  CramerSolution solution;
};

namespace detail {

struct PhiEval {
  double f;   // phi - 1
  double df;  // phi'
};

inline PhiEval eval_phi(const VectorModel& m, double theta) {
  return {phi(m, theta).value - 1.0, phi_prime(m, theta).value};
}

// Minimiser of the convex phi on [lo, hi] by bisection on phi'.
inline double phi_argmin(const VectorModel& m, double lo, double hi) {
  if (phi_prime(m, hi).value <= 0.0) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi_prime(m, mid).value < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Solves phi(alpha) = 1 on `bracket` by bisection with safeguarded Newton
/// steps. In the critical homogeneous case (phi(1) = 1 and Q = 0) the search
/// is restricted to the second root above 1.
inline CramerSolution solve_alpha(const VectorModel& m, Bracket bracket = {}, double tol = 1e-12) {
  if (!(bracket.lo > 0.0 && bracket.hi > bracket.lo))
    throw Error(ErrorKind::invalid_parameter, "bracket must satisfy 0 < lo < hi");
  if (!(tol > 0.0)) throw Error(ErrorKind::invalid_parameter, "tol must be > 0");
  for (double t : {bracket.lo, bracket.hi})
    if (!phi(m, t).finite() || phi(m, t).method != Method::closed_form)
      throw Error(ErrorKind::noisy_functional, "phi must be closed-form and finite on the bracket");

  CramerSolution sol;
  sol.bracket = bracket;
  double lo = bracket.lo;
  double hi = bracket.hi;

  const bool critical = std::abs(phi(m, 1.0).value - 1.0) <= tol && mark_positive_probability(m) == 0.0;
  if (critical) {
    sol.root_kind = RootKind::second_root_of_critical_pair;
    if (hi <= 1.0) throw Error(ErrorKind::no_sign_change, "critical pair needs hi > 1");
    if (phi_prime(m, 1.0).value >= 0.0)
      throw Error(ErrorKind::no_sign_change, "phi increases at 1: no second root above 1");
    lo = std::max(lo, detail::phi_argmin(m, 1.0, hi));
  }

  const double flo = detail::eval_phi(m, lo).f;
  const double fhi = detail::eval_phi(m, hi).f;
  if (flo == 0.0 || fhi == 0.0) {
    sol.alpha = flo == 0.0 ? lo : hi;
  } else {
    if ((flo > 0.0) == (fhi > 0.0))
      throw Error(ErrorKind::no_sign_change, "phi - 1 has the same sign at both bracket ends");
    // orient so that f(xl) < 0
    double xl = flo < 0.0 ? lo : hi;
    double xh = flo < 0.0 ? hi : lo;
    double x = 0.5 * (xl + xh);
    double dx_old = std::abs(xh - xl);
    double dx = dx_old;
    const auto start = detail::eval_phi(m, x);
    double f = start.f;
    double df = start.df;
    int it = 0;
    for (; it < 300; ++it) {
      const bool newton_out = ((x - xh) * df - f) * ((x - xl) * df - f) > 0.0;
      const bool newton_slow = std::abs(2.0 * f) > std::abs(dx_old * df);
      dx_old = dx;
      if (newton_out || newton_slow || df == 0.0) {
        dx = 0.5 * (xh - xl);
        x = xl + dx;
      } else {
        dx = f / df;
        x -= dx;
      }
      const auto e = detail::eval_phi(m, x);
      f = e.f;
      df = e.df;
      if (f < 0.0)
        xl = x;
      else
        xh = x;
      const bool small_step = std::abs(dx) <= 1e-15 * (1.0 + std::abs(x));
      if (f == 0.0 || (std::abs(f) <= tol && small_step)) break;
      if (std::abs(xh - xl) <= 4e-16 * (1.0 + std::abs(x)) && std::abs(f) <= tol) break;
    }
    sol.alpha = x;
    sol.iterations = it + 1;
  }

  sol.residual = std::abs(phi(m, sol.alpha).value - 1.0);
  sol.mu = phi_prime(m, sol.alpha).value;
  if (sol.residual > tol)
    throw Error(ErrorKind::no_sign_change, "solver did not reach the requested tolerance");
  if (!(sol.mu > 0.0)) throw ContractionRootError(sol);
  return sol;
}

inline nlohmann::json to_json(const CramerSolution& s) {
  return {{"alpha", s.alpha},
          {"mu", s.mu},
          {"residual", s.residual},
          {"root_kind", to_string(s.root_kind)},
          {"bracket", {s.bracket.lo, s.bracket.hi}},
          {"iterations", s.iterations}};
}

// ---------------------------------------------------------------------------
// Hypothesis checks

enum class CheckStatus { pass, fail, unknown };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::unknown: return "unknown";
  }
  return "?";
}

struct ConditionEntry {
  std::string name;
  CheckStatus status = CheckStatus::unknown;
  double value = 0.0;
  double std_error = 0.0;
  std::string note;
};

struct ConditionReport {
  RecursionKind kind = RecursionKind::linear;
  std::vector<ConditionEntry> entries;

  bool passed() const {
    for (const auto& e : entries)
      if (e.status != CheckStatus::pass) return false;
    return !entries.empty();
  }

  const ConditionEntry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json j{{"name", e.name}, {"status", to_string(e.status)}};
    if (std::isfinite(e.value))
      j["value"] = e.value;
    else
      j["value"] = "infinite";
    if (e.std_error > 0.0) j["std_error"] = e.std_error;
    if (!e.note.empty()) j["note"] = e.note;
    entries.push_back(std::move(j));
  }
  return {{"kind", to_string(r.kind)}, {"passed", r.passed()}, {"entries", entries}};
}

/// Evaluates the power-tail hypotheses for `kind` at the root in
/// `sol`. Finiteness entries use closed-form moments or closed-form upper
/// bounds, so every verdict is deterministic. The max-plus recursion is
/// checked against the linear hypotheses.
inline ConditionReport check_conditions(const VectorModel& m, const CramerSolution& sol,
                                        RecursionKind kind, double epsilon = 0.5) {
  if (kind == RecursionKind::generation)
    throw Error(ErrorKind::unsupported, "no power-tail result applies to the generation kind");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error(ErrorKind::invalid_parameter, "epsilon must lie in (0, 1)");
  ConditionReport rep;
  rep.kind = kind;
  const double a = sol.alpha;
  auto add = [&](std::string name, bool ok, double value, std::string note = {}) {
    rep.entries.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, value, 0.0,
                           std::move(note)});
  };

  const double phi_a = phi(m, a).value;
  add("phi(alpha)=1", std::abs(phi_a - 1.0) <= 1e-8, phi_a);
  const auto mu = phi_prime(m, a);
  add("0<mu<inf", mu.finite() && mu.value > 0.0, mu.value);
  const Tristate arith = nonarithmetic(m);
  rep.entries.push_back({"nonarithmetic",
                         arith == Tristate::yes  ? CheckStatus::pass
                         : arith == Tristate::no ? CheckStatus::fail
                                                 : CheckStatus::unknown,
                         0.0, 0.0, std::string("log C law: ") + to_string(arith)});

  if (is_nonhomogeneous(kind)) {
    add("P(Q>0)>0", mark_positive_probability(m) > 0.0, mark_positive_probability(m));
    const double eqa = mark_moment(m, a);
    add("E[Q^alpha]<inf", std::isfinite(eqa), eqa);
    if (a > 1.0) {
      if (kind != RecursionKind::max) {
        const double rho = phi(m, 1.0).value;
        add("E[sum C]<1", rho < 1.0, rho);
      }
      const auto b = sum_moment_bound(m, a);
      add("E[(sum C)^alpha]<inf", std::isfinite(b.value), b.value, b.exact ? "exact" : "upper bound");
    } else {
      // (sum_{i<=n} x_i)^(1+e) <= n^e sum x_i^(1+e)
      const double ec = weight_moment(m, a);
      const bool one = count_at_most_one(m.count);
      const double bound = one ? count_pmf(m.count, 1) * ec
                               : count_power_moment(m.count, 1.0 + epsilon) * ec;
      add("E[(sum C^(alpha/(1+eps)))^(1+eps)]<inf", std::isfinite(bound), bound,
          (one ? "exact, eps=" : "upper bound, eps=") + std::to_string(epsilon));
    }
  } else {
    add("alpha>1", a > 1.0, a);
    const double rho = phi(m, 1.0).value;
    add("phi(1)=1", std::abs(rho - 1.0) <= 1e-9, rho);
    const auto b = sum_moment_bound(m, a);
    add("E[(sum C)^alpha]<inf", std::isfinite(b.value), b.value, b.exact ? "exact" : "upper bound");
    // C^a log+ C <= C^(a+1)
    const double lp = count_mean(m.count) * weight_moment(m, a + 1.0);
    add("E[sum C^alpha log+ C]<inf", std::isfinite(lp), lp, "upper bound");
    const double p2 = prob_two_positive_weights(m);
    add("P(N~>=2)>0", p2 > 0.0, p2);
  }
  return rep;
}

}  // namespace wbt
