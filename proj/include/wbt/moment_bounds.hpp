#pragma once

// Constructive moment bounds for W_n and the truncation error of R^(n).

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "wbt/model.hpp"

namespace wbt {

// Which marks sit at the nodes of W_n: the model's Q, or Q = 1 as in the
// martingale construction of the homogeneous solution.
enum class Marks { model, unit };

inline double mark_moment(const VectorModel& m, double beta, Marks marks) {
  return marks == Marks::unit ? 1.0 : mark_moment(m, beta);
}

struct BoundValue {
  double value = 0.0;
  bool applicable = true;  // false when the bound's preconditions are unmet
  std::string name;
  std::string note;
};

inline nlohmann::json to_json(const BoundValue& b) {
  nlohmann::json j{{"name", b.name}, {"applicable", b.applicable}};
  if (b.applicable && std::isfinite(b.value))
    j["value"] = b.value;
  else
    j["value"] = b.applicable ? "infinite" : "precondition-unmet";
  if (!b.note.empty()) j["note"] = b.note;
  return j;
}

/// Constant K_p of E[W_n^p] <= K_p (rho v rho_p)^n for integer p >= 1, built
/// by induction on p (K_1 = E[Q] since E[W_n] = E[Q] rho^n). Requires
/// rho v rho_p < 1 for p >= 2. E[(sum C)^p] enters through its closed form
/// or a closed-form upper bound; K_p is increasing in it.
inline double k_integer(const VectorModel& m, unsigned p, Marks marks) {
  if (p == 1) return mark_moment(m, 1.0, marks);
  const double rate = std::max(phi(m, 1.0).value, phi(m, p).value);
  const double eqp = mark_moment(m, p, marks);
  if (rate == 0.0) return eqp;
  const double prev = k_integer(m, p - 1, marks);
  const double pd = static_cast<double>(p);
  const double k = sum_moment_bound(m, pd).value * std::pow(prev, pd / (pd - 1.0));
  // sum_{j>=0} rate^(j/(p-1)) = 1 / (1 - rate^(1/(p-1)))
  return eqp + k / (rate * (1.0 - std::pow(rate, 1.0 / (pd - 1.0))));
}

/// K_beta for beta > 1: the integer construction when beta is an integer,
/// otherwise the fractional step from K_{p-1}, p = ceil(beta).
inline double k_beta(const VectorModel& m, double beta, Marks marks) {
  if (beta == std::floor(beta)) return k_integer(m, static_cast<unsigned>(beta), marks);
  const auto p = static_cast<unsigned>(std::ceil(beta));
  const double gamma = beta / (p - 1.0);
  const double rate = std::max(phi(m, 1.0).value, phi(m, beta).value);
  const double eqb = mark_moment(m, beta, marks);
  if (rate == 0.0) return eqb;
  const double kprime = sum_moment_bound(m, beta).value * std::pow(k_integer(m, p - 1, marks), gamma);
  return eqb + kprime / (rate * (1.0 - std::pow(rate, gamma - 1.0)));
}

/// Upper bound on E[W_n^beta].
///
/// beta <= 1: E[Q^beta] rho_beta^n, valid for every model.
/// beta > 1: K_beta (rho v rho_beta)^n, needs finite E[Q^beta] and
/// E[(sum C)^beta] and rho v rho_beta < 1.
///
/// `k_factor` multiplies K_beta; it exists only so the verification harness
/// can be shown to fail on a corrupted constant.
inline BoundValue wn_moment_bound(const VectorModel& m, double beta, unsigned n,
                                  Marks marks = Marks::model, double k_factor = 1.0) {
  BoundValue out;
  if (!(beta > 0.0)) throw Error(ErrorKind::invalid_parameter, "beta must be > 0");
  const double eqb = mark_moment(m, beta, marks);
  const auto rho_b = phi(m, beta);
  if (beta <= 1.0) {
    out.name = "E[W_n^b]<=E[Q^b]rho_b^n";
    if (!rho_b.finite() || !std::isfinite(eqb)) {
      out.applicable = false;
      out.note = "divergent moment";
      return out;
    }
    out.value = eqb * std::pow(rho_b.value, static_cast<double>(n));
    return out;
  }
  out.name = "E[W_n^b]<=K_b(rho v rho_b)^n";
  const double rate = std::max(phi(m, 1.0).value, rho_b.value);
  const auto smb = sum_moment_bound(m, beta);
  if (!std::isfinite(eqb) || !std::isfinite(smb.value) || !(rate < 1.0)) {
    out.applicable = false;
    out.note = "needs rho v rho_b < 1 and finite E[Q^b], E[(sum C)^b]";
    return out;
  }
  const double k = k_factor * k_beta(m, beta, marks);
  out.value = k * std::pow(rate, static_cast<double>(n));
  out.note = "K_b=" + std::to_string(k) + (smb.exact ? "" : " (E[(sum C)^b] upper bound)");
  return out;
}

/// Bound on E[(R - R^(n))^beta] for the depth-n truncation of `kind`.
///
/// Linear and max-plus with beta <= 1, and max with any beta, use the
/// geometric tail E[Q^b] rho_b^(n+1) / (1 - rho_b); linear with beta > 1
/// uses K_b eta^(n+1) / (1 - eta^(1/b))^b, eta = rho v rho_b. The max-plus
/// remainder is dominated by the linear one.
inline BoundValue truncation_bound(const VectorModel& m, double beta, unsigned depth,
                                   RecursionKind kind = RecursionKind::linear) {
  BoundValue out;
  out.name = "E[(R-R^(n))^b]";
  if (!(beta > 0.0)) throw Error(ErrorKind::invalid_parameter, "beta must be > 0");
  if (kind == RecursionKind::homogeneous || kind == RecursionKind::generation) {
    out.applicable = false;
    out.note = "not-applicable: W_n is not a partial sum";
    return out;
  }
  const double nn = static_cast<double>(depth);
  const double eqb = mark_moment(m, beta);
  const auto rho_b = phi(m, beta);
  if (beta <= 1.0 || kind == RecursionKind::max) {
    if (!rho_b.finite() || !(rho_b.value < 1.0) || !std::isfinite(eqb)) {
      out.value = kInfinity;
      out.note = "non-contractive: rho_b >= 1";
      return out;
    }
    out.value = eqb * std::pow(rho_b.value, nn + 1.0) / (1.0 - rho_b.value);
    return out;
  }
  if (kind == RecursionKind::max_plus) {
    out.value = kInfinity;
    out.note = "max-plus bound implemented for beta <= 1 only";
    return out;
  }
  const double eta = std::max(phi(m, 1.0).value, rho_b.value);
  if (!(eta < 1.0) || !std::isfinite(sum_moment_bound(m, beta).value) || !std::isfinite(eqb)) {
    out.value = kInfinity;
    out.note = "non-contractive: rho v rho_b >= 1";
    return out;
  }
  const double k = k_beta(m, beta, Marks::model);
  out.value = k * std::pow(eta, nn + 1.0) / std::pow(1.0 - std::pow(eta, 1.0 / beta), beta);
  return out;
}

}  // namespace wbt
