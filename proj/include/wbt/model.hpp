#pragma once

// Parametric laws of the generic node vector (Q, N, C_1, ..., C_N) and the
// moment functionals built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <nlohmann/json.hpp>

#include "wbt/error.hpp"
#include "wbt/random.hpp"
#include "wbt/stats.hpp"

namespace wbt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Recursion kinds

enum class RecursionKind {
  linear,       // R = sum C_i R_i + Q
  homogeneous,  // W_n with unit marks, critical case R = sum C_i R_i
  max,          // R = (max C_i R_i) v Q
  max_plus,     // R = (max C_i R_i) + Q
  generation,   // W_n = sum over generation n of Q_i Pi_i
};

inline const char* to_string(RecursionKind kind) {
  switch (kind) {
    case RecursionKind::linear: return "linear";
    case RecursionKind::homogeneous: return "homogeneous";
    case RecursionKind::max: return "max";
    case RecursionKind::max_plus: return "max-plus";
    case RecursionKind::generation: return "generation";
  }
  return "?";
}

inline RecursionKind parse_recursion_kind(const std::string& name) {
  if (name == "linear" || name == "linear-nonhomogeneous") return RecursionKind::linear;
  if (name == "homogeneous" || name == "homogeneous-martingale") return RecursionKind::homogeneous;
  if (name == "max") return RecursionKind::max;
  if (name == "max-plus") return RecursionKind::max_plus;
  if (name == "generation") return RecursionKind::generation;
  throw Error(ErrorKind::invalid_config, "unknown recursion kind '" + name + "'");
}

constexpr bool is_nonhomogeneous(RecursionKind kind) {
  return kind == RecursionKind::linear || kind == RecursionKind::max ||
         kind == RecursionKind::max_plus;
}

// ---------------------------------------------------------------------------
// Laws

struct FixedCount {
  unsigned value = 0;
};
struct TwoPointCount {
  unsigned low = 0;
  unsigned high = 1;
  double p_low = 0.5;
};
// P(N = k) = (1 - p)^k p, k >= 0
struct GeometricCount {
  double p = 0.5;
};
struct PoissonCount {
  double mean = 1.0;
};
using CountLaw = std::variant<FixedCount, TwoPointCount, GeometricCount, PoissonCount>;

struct Constant {
  double value = 1.0;
};
struct LogNormal {
  double mu = 0.0;
  double sigma2 = 1.0;
};
struct UniformZeroTo {
  double upper = 1.0;
};
// scale * Beta(a, b)
struct ScaledBeta {
  double a = 1.0;
  double b = 1.0;
  double scale = 1.0;
};
using WeightLaw = std::variant<Constant, LogNormal, UniformZeroTo, ScaledBeta>;
using MarkLaw = std::variant<Constant, LogNormal, UniformZeroTo>;

enum class Coupling { iid_independent };

enum class Tristate { yes, no, unknown };

inline const char* to_string(Tristate t) {
  switch (t) {
    case Tristate::yes: return "yes";
    case Tristate::no: return "no";
    case Tristate::unknown: return "unknown";
  }
  return "?";
}

/// Law of the node vector: N from `count`, C_i iid from `weight` times
/// `c_scale` and independent of N, Q from `mark`.
struct VectorModel {
  CountLaw count = FixedCount{0};
  WeightLaw weight = Constant{1.0};
  MarkLaw mark = Constant{1.0};
  double c_scale = 1.0;
  Coupling coupling = Coupling::iid_independent;
  nlohmann::json source;  // canonical spec, used for fingerprints and reports
};

struct NodeVector {
  double q = 0.0;
  unsigned n = 0;
  std::vector<double> c;
};

enum class Finiteness { finite, infinite, unknown };
enum class Method { closed_form, monte_carlo };

inline const char* to_string(Method m) {
  return m == Method::closed_form ? "closed-form" : "monte-carlo";
}
inline const char* to_string(Finiteness f) {
  switch (f) {
    case Finiteness::finite: return "finite";
    case Finiteness::infinite: return "infinite";
    case Finiteness::unknown: return "unknown";
  }
  return "?";
}

struct MomentValue {
  double value = 0.0;
  Method method = Method::closed_form;
  double std_error = 0.0;
  Finiteness status = Finiteness::finite;
  bool divergence_suspected = false;

  bool finite() const noexcept { return status == Finiteness::finite; }

  static MomentValue closed(double v) {
    if (!std::isfinite(v)) return infinite();
    return {v, Method::closed_form, 0.0, Finiteness::finite, false};
  }
  static MomentValue infinite() {
    return {kInfinity, Method::closed_form, 0.0, Finiteness::infinite, false};
  }
};

inline nlohmann::json to_json(const MomentValue& m) {
  nlohmann::json j;
  j["method"] = to_string(m.method);
  j["status"] = to_string(m.status);
  if (m.finite()) {
    j["value"] = m.value;
    j["std_error"] = m.std_error;
  } else {
    j["value"] = to_string(m.status);
  }
  if (m.divergence_suspected) j["divergence_suspected"] = true;
  return j;
}

// ---------------------------------------------------------------------------
// Count law functionals

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Calls f(k, P(N = k)) over the support, truncating unbounded laws once
// the remaining mass is negligible.
template <class F>
void for_each_atom(const CountLaw& law, F&& f) {
  std::visit(overloaded{
                 [&](const FixedCount& d) { f(d.value, 1.0); },
                 [&](const TwoPointCount& d) {
                   if (d.low == d.high) {
                     f(d.low, 1.0);
                     return;
                   }
                   f(d.low, d.p_low);
                   f(d.high, 1.0 - d.p_low);
                 },
                 [&](const GeometricCount& d) {
                   double pk = d.p;
                   double mass = 0.0;
                   for (unsigned k = 0; k < 100000; ++k) {
                     f(k, pk);
                     mass += pk;
                     if (1.0 - mass < 1e-17 || pk < 1e-300) break;
                     pk *= 1.0 - d.p;
                   }
                 },
                 [&](const PoissonCount& d) {
                   if (d.mean == 0.0) {
                     f(0u, 1.0);
                     return;
                   }
                   const auto mode = static_cast<unsigned>(d.mean);
                   const unsigned upper = mode + 40 + static_cast<unsigned>(12.0 * std::sqrt(d.mean));
                   for (unsigned k = 0; k <= upper; ++k) {
                     const double lp = -d.mean + k * std::log(d.mean) - std::lgamma(k + 1.0);
                     f(k, std::exp(lp));
                   }
                 },
             },
             law);
}

}  // namespace detail

inline double count_mean(const CountLaw& law) {
  return std::visit(detail::overloaded{
                        [](const FixedCount& d) { return static_cast<double>(d.value); },
                        [](const TwoPointCount& d) {
                          return d.p_low * d.low + (1.0 - d.p_low) * d.high;
                        },
                        [](const GeometricCount& d) { return (1.0 - d.p) / d.p; },
                        [](const PoissonCount& d) { return d.mean; },
                    },
                    law);
}

// E[N (N - 1)]
inline double count_factorial_moment2(const CountLaw& law) {
  return std::visit(detail::overloaded{
                        [](const FixedCount& d) { return double(d.value) * (double(d.value) - 1.0); },
                        [](const TwoPointCount& d) {
                          return d.p_low * d.low * (d.low - 1.0) +
                                 (1.0 - d.p_low) * d.high * (d.high - 1.0);
                        },
                        [](const GeometricCount& d) {
                          const double r = (1.0 - d.p) / d.p;
                          return 2.0 * r * r;
                        },
                        [](const PoissonCount& d) { return d.mean * d.mean; },
                    },
                    law);
}

// E[N^beta], beta > 0
inline double count_power_moment(const CountLaw& law, double beta) {
  double acc = 0.0;
  detail::for_each_atom(law, [&](unsigned k, double p) {
    if (k > 0) acc += p * std::pow(static_cast<double>(k), beta);
  });
  return acc;
}

inline double count_pmf(const CountLaw& law, unsigned k) {
  double out = 0.0;
  detail::for_each_atom(law, [&](unsigned j, double p) {
    if (j == k) out += p;
  });
  return out;
}

// True when P(N <= 1) = 1.
inline bool count_at_most_one(const CountLaw& law) {
  bool ok = true;
  detail::for_each_atom(law, [&](unsigned k, double p) {
    if (k > 1 && p > 0.0) ok = false;
  });
  return ok;
}

template <class Engine>
unsigned sample_count(const CountLaw& law, Engine& eng) {
  return std::visit(detail::overloaded{
                        [&](const FixedCount& d) { return d.value; },
                        [&](const TwoPointCount& d) {
                          return std::uniform_real_distribution<double>(0.0, 1.0)(eng) < d.p_low
                                     ? d.low
                                     : d.high;
                        },
                        [&](const GeometricCount& d) {
                          return std::geometric_distribution<unsigned>(d.p)(eng);
                        },
                        [&](const PoissonCount& d) {
                          if (d.mean == 0.0) return 0u;
                          return std::poisson_distribution<unsigned>(d.mean)(eng);
                        },
                    },
                    law);
}

// ---------------------------------------------------------------------------
// Weight and mark law functionals (unscaled)

namespace detail {

inline double power_moment(const Constant& d, double theta) {
  if (theta == 0.0) return 1.0;
  return std::pow(d.value, theta);
}
inline double power_moment(const LogNormal& d, double theta) {
  return std::exp(theta * d.mu + 0.5 * theta * theta * d.sigma2);
}
inline double power_moment(const UniformZeroTo& d, double theta) {
  if (theta <= -1.0) return kInfinity;
  return std::pow(d.upper, theta) / (theta + 1.0);
}
inline double power_moment(const ScaledBeta& d, double theta) {
  if (theta <= -d.a) return kInfinity;
  const double log_ratio = std::lgamma(d.a + theta) - std::lgamma(d.a) + std::lgamma(d.a + d.b) -
                           std::lgamma(d.a + d.b + theta);
  return std::pow(d.scale, theta) * std::exp(log_ratio);
}

// E[X^theta log X] with the convention 0^theta log 0 = 0.
inline double log_moment(const Constant& d, double theta) {
  if (d.value <= 0.0) return 0.0;
  return power_moment(d, theta) * std::log(d.value);
}
inline double log_moment(const LogNormal& d, double theta) {
  return (d.mu + theta * d.sigma2) * power_moment(d, theta);
}
inline double log_moment(const UniformZeroTo& d, double theta) {
  if (theta <= -1.0) return kInfinity;
  return std::pow(d.upper, theta) * (std::log(d.upper) - 1.0 / (theta + 1.0)) / (theta + 1.0);
}
inline double log_moment(const ScaledBeta& d, double theta) {
  if (theta <= -d.a) return kInfinity;
  using boost::math::digamma;
  return power_moment(d, theta) *
         (digamma(d.a + theta) - digamma(d.a + d.b + theta) + std::log(d.scale));
}

template <class Engine>
double draw(const Constant& d, Engine&) {
  return d.value;
}
template <class Engine>
double draw(const LogNormal& d, Engine& eng) {
  return std::exp(d.mu + std::sqrt(d.sigma2) * std::normal_distribution<double>(0.0, 1.0)(eng));
}
template <class Engine>
double draw(const UniformZeroTo& d, Engine& eng) {
  return d.upper * std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}
template <class Engine>
double draw(const ScaledBeta& d, Engine& eng) {
  const double x = std::gamma_distribution<double>(d.a, 1.0)(eng);
  const double y = std::gamma_distribution<double>(d.b, 1.0)(eng);
  return d.scale * x / (x + y);
}

inline double positive_probability(const Constant& d) { return d.value > 0.0 ? 1.0 : 0.0; }
inline double positive_probability(const LogNormal&) { return 1.0; }
inline double positive_probability(const UniformZeroTo&) { return 1.0; }
inline double positive_probability(const ScaledBeta&) { return 1.0; }

}  // namespace detail

template <class Law>
double law_power_moment(const Law& law, double theta) {
  return std::visit([&](const auto& d) { return detail::power_moment(d, theta); }, law);
}

template <class Law>
double law_log_moment(const Law& law, double theta) {
  return std::visit([&](const auto& d) { return detail::log_moment(d, theta); }, law);
}

template <class Law>
double law_positive_probability(const Law& law) {
  return std::visit([](const auto& d) { return detail::positive_probability(d); }, law);
}

template <class Law, class Engine>
double sample_law(const Law& law, Engine& eng) {
  return std::visit([&](const auto& d) { return detail::draw(d, eng); }, law);
}

// E[C^theta] for the scaled weight.
inline double weight_moment(const VectorModel& m, double theta) {
  const double base = law_power_moment(m.weight, theta);
  if (theta == 0.0) return base;
  return std::pow(m.c_scale, theta) * base;
}

// E[C^theta log C] for the scaled weight.
inline double weight_log_moment(const VectorModel& m, double theta) {
  const double s_theta = std::pow(m.c_scale, theta);
  return s_theta * (law_log_moment(m.weight, theta) +
                    std::log(m.c_scale) * law_power_moment(m.weight, theta));
}

// E[Q^beta]
inline double mark_moment(const VectorModel& m, double beta) {
  return law_power_moment(m.mark, beta);
}

inline double mark_positive_probability(const VectorModel& m) {
  return law_positive_probability(m.mark);
}

/// Whether the law of log C is nonarithmetic, read off the family.
inline Tristate nonarithmetic(const VectorModel& m) {
  if (std::holds_alternative<Constant>(m.weight)) return Tristate::no;
  return Tristate::yes;
}

/// P(Ñ >= 2) where Ñ counts the strictly positive weights.
inline double prob_two_positive_weights(const VectorModel& m) {
  const double p = law_positive_probability(m.weight);
  double acc = 0.0;
  detail::for_each_atom(m.count, [&](unsigned k, double pk) {
    if (k < 2 || p == 0.0) return;
    const double none = std::pow(1.0 - p, k);
    const double one = k * p * std::pow(1.0 - p, k - 1.0);
    acc += pk * std::max(0.0, 1.0 - none - one);
  });
  return acc;
}

template <class Engine>
NodeVector sample_vector(const VectorModel& m, Engine& eng) {
  NodeVector v;
  v.q = sample_law(m.mark, eng);
  v.n = sample_count(m.count, eng);
  v.c.resize(v.n);
  for (auto& c : v.c) c = m.c_scale * sample_law(m.weight, eng);
  return v;
}

// ---------------------------------------------------------------------------
// Moment functionals

/// rho_theta = phi(theta) = E[sum C_i^theta], closed form under the
/// iid-independent coupling.
inline MomentValue phi(const VectorModel& m, double theta) {
  if (!(theta >= 0.0)) throw Error(ErrorKind::invalid_parameter, "phi needs theta >= 0");
  const double en = count_mean(m.count);
  const double ec = weight_moment(m, theta);
  if (!std::isfinite(ec)) return MomentValue::infinite();
  return MomentValue::closed(en * ec);
}

/// phi'(theta) = E[sum C_i^theta log C_i].
inline MomentValue phi_prime(const VectorModel& m, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorKind::invalid_parameter, "phi_prime needs theta > 0");
  const double v = count_mean(m.count) * weight_log_moment(m, theta);
  if (!std::isfinite(v)) return MomentValue::infinite();
  return MomentValue::closed(v);
}

/// Monte Carlo estimate of phi(theta), independent of the closed form.
inline MomentValue phi_monte_carlo(const VectorModel& m, double theta, std::size_t reps,
                                   std::uint64_t seed) {
  RunningMoments acc;
  for (std::size_t r = 0; r < reps; ++r) {
    SplitMix64 eng(replication_key(seed, r));
    const NodeVector v = sample_vector(m, eng);
    double s = 0.0;
    for (double c : v.c) s += std::pow(c, theta);
    acc.add(s);
  }
  return {acc.mean(), Method::monte_carlo, acc.std_error(), Finiteness::finite, false};
}

/// Analytic value of E[(sum C_i)^beta] where one exists, otherwise a
/// closed-form upper bound. `exact` tells which.
struct SumMomentBound {
  double value = 0.0;
  bool exact = false;
};

inline SumMomentBound sum_moment_bound(const VectorModel& m, double beta) {
  const double ec_beta = weight_moment(m, beta);
  if (count_at_most_one(m.count)) return {count_pmf(m.count, 1) * ec_beta, true};
  if (auto* fixed = std::get_if<FixedCount>(&m.count);
      fixed && std::holds_alternative<Constant>(m.weight)) {
    const double c = m.c_scale * std::get<Constant>(m.weight).value;
    return {std::pow(fixed->value * c, beta), true};
  }
  if (beta == 1.0) return {count_mean(m.count) * weight_moment(m, 1.0), true};
  if (beta == 2.0) {
    const double ec = weight_moment(m, 1.0);
    return {count_mean(m.count) * weight_moment(m, 2.0) +
                count_factorial_moment2(m.count) * ec * ec,
            true};
  }
  // (x_1 + ... + x_n)^b <= n^(b-1) sum x_i^b for b >= 1, and <= sum x_i^b for b < 1
  if (beta >= 1.0) return {count_power_moment(m.count, beta) * ec_beta, false};
  return {count_mean(m.count) * ec_beta, false};
}

/// E[(sum C_i)^beta]: closed form when N <= 1 a.s. or everything is
/// deterministic, Monte Carlo otherwise.
inline MomentValue sum_moment(const VectorModel& m, double beta, std::size_t reps,
                              std::uint64_t seed) {
  if (!(beta > 0.0)) throw Error(ErrorKind::invalid_parameter, "sum_moment needs beta > 0");
  const bool deterministic =
      std::holds_alternative<FixedCount>(m.count) && std::holds_alternative<Constant>(m.weight);
  if (count_at_most_one(m.count) || deterministic) {
    const auto b = sum_moment_bound(m, beta);
    return MomentValue::closed(b.value);
  }
  if (reps < 1) throw Error(ErrorKind::invalid_parameter, "sum_moment needs reps >= 1");
  RunningMoments acc;
  double largest = 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    SplitMix64 eng(replication_key(seed, r));
    const NodeVector v = sample_vector(m, eng);
    double s = 0.0;
    for (double c : v.c) s += c;
    const double term = std::pow(s, beta);
    acc.add(term);
    largest = std::max(largest, term);
    total += term;
  }
  MomentValue out{acc.mean(), Method::monte_carlo, acc.std_error(), Finiteness::finite, false};
  out.divergence_suspected = reps >= 100 && total > 0.0 && largest > 0.1 * total;
  return out;
}

// ---------------------------------------------------------------------------
// Construction from a config section

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_config, where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(ErrorKind::invalid_config, "unknown key '" + item.key() + "' in " + where);
  }
}

inline double number(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(ErrorKind::invalid_parameter, where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline CountLaw parse_count(const nlohmann::json& j) {
  const std::string where = "model.N";
  if (!j.is_object() || !j.contains("family"))
    throw Error(ErrorKind::invalid_config, where + " needs a family");
  const auto family = j.at("family").get<std::string>();
  auto count_value = [&](double v) {
    if (v < 0.0 || v != std::floor(v) || v > 1e6)
      throw Error(ErrorKind::invalid_parameter, where + " values must be small nonnegative integers");
    return static_cast<unsigned>(v);
  };
  if (family == "deterministic") {
    require_keys(j, {"family", "value"}, where);
    return FixedCount{count_value(number(j, "value", where))};
  }
  if (family == "two-point") {
    require_keys(j, {"family", "values", "probs"}, where);
    const auto values = j.at("values").get<std::vector<double>>();
    const auto probs = j.at("probs").get<std::vector<double>>();
    if (values.size() != 2 || probs.size() != 2)
      throw Error(ErrorKind::invalid_parameter, where + " two-point needs two values and two probs");
    for (double p : probs)
      if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorKind::invalid_parameter, where + " probabilities must lie in [0,1]");
    if (std::abs(probs[0] + probs[1] - 1.0) > 1e-12)
      throw Error(ErrorKind::invalid_parameter, where + " probabilities must sum to 1");
    return TwoPointCount{count_value(values[0]), count_value(values[1]), probs[0]};
  }
  if (family == "geometric") {
    require_keys(j, {"family", "p"}, where);
    const double p = number(j, "p", where);
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_parameter, where + ".p must lie in (0,1]");
    return GeometricCount{p};
  }
  if (family == "poisson") {
    require_keys(j, {"family", "mean"}, where);
    const double lambda = number(j, "mean", where);
    if (!(lambda >= 0.0 && lambda < 1e4))
      throw Error(ErrorKind::invalid_parameter, where + ".mean must be in [0, 1e4)");
    return PoissonCount{lambda};
  }
  throw Error(ErrorKind::unknown_family, where + " family '" + family + "'");
}

template <class Law>
Law parse_positive_law(const nlohmann::json& j, const std::string& where, bool allow_beta) {
  if (!j.is_object() || !j.contains("family"))
    throw Error(ErrorKind::invalid_config, where + " needs a family");
  const auto family = j.at("family").get<std::string>();
  if (family == "deterministic") {
    require_keys(j, {"family", "value"}, where);
    const double v = number(j, "value", where);
    if (!(v >= 0.0 && std::isfinite(v))) throw Error(ErrorKind::invalid_parameter, where + ".value must be >= 0");
    return Constant{v};
  }
  if (family == "lognormal") {
    require_keys(j, {"family", "mu", "sigma2"}, where);
    const double s2 = number(j, "sigma2", where);
    if (!(s2 > 0.0)) throw Error(ErrorKind::invalid_parameter, where + ".sigma2 must be > 0");
    return LogNormal{number(j, "mu", where), s2};
  }
  if (family == "uniform") {
    require_keys(j, {"family", "upper"}, where);
    const double b = number(j, "upper", where);
    if (!(b > 0.0)) throw Error(ErrorKind::invalid_parameter, where + ".upper must be > 0");
    return UniformZeroTo{b};
  }
  if constexpr (std::is_same_v<Law, WeightLaw>) {
    if (allow_beta && family == "beta-scaled") {
      require_keys(j, {"family", "a", "b", "scale"}, where);
      const double a = number(j, "a", where), b = number(j, "b", where);
      const double s = j.contains("scale") ? number(j, "scale", where) : 1.0;
      if (!(a > 0.0 && b > 0.0 && s > 0.0))
        throw Error(ErrorKind::invalid_parameter, where + " beta parameters must be > 0");
      return ScaledBeta{a, b, s};
    }
  }
  throw Error(ErrorKind::unknown_family, where + " family '" + family + "'");
}

}  // namespace detail

namespace presets {

inline nlohmann::json spec(const std::string& name);

}  // namespace presets

/// Builds and validates a model from its config section. `kind`, when
/// given, is the recursion the model is meant for; nonhomogeneous kinds
/// reject P(Q > 0) = 0.
inline VectorModel make_model(const nlohmann::json& spec,
                              std::optional<RecursionKind> kind = std::nullopt) {
  nlohmann::json resolved = spec;
  if (spec.is_object() && spec.contains("preset")) {
    detail::require_keys(spec, {"preset", "c_scale"}, "model");
    resolved = presets::spec(spec.at("preset").get<std::string>());
    if (spec.contains("c_scale")) resolved["c_scale"] = spec.at("c_scale");
  }
  detail::require_keys(resolved, {"N", "C", "Q", "c_scale", "coupling"}, "model");
  for (const char* key : {"N", "C", "Q"})
    if (!resolved.contains(key))
      throw Error(ErrorKind::invalid_config, std::string("model.") + key + " is required");

  VectorModel m;
  m.count = detail::parse_count(resolved.at("N"));
  m.weight = detail::parse_positive_law<WeightLaw>(resolved.at("C"), "model.C", true);
  m.mark = detail::parse_positive_law<MarkLaw>(resolved.at("Q"), "model.Q", false);
  if (resolved.contains("c_scale")) {
    m.c_scale = resolved.at("c_scale").get<double>();
    if (!(m.c_scale > 0.0 && std::isfinite(m.c_scale)))
      throw Error(ErrorKind::invalid_parameter, "model.c_scale must be > 0");
  }
  if (resolved.contains("coupling") && resolved.at("coupling") != "iid-independent")
    throw Error(ErrorKind::invalid_parameter, "only the iid-independent coupling is supported");
  if (kind && is_nonhomogeneous(*kind) && mark_positive_probability(m) == 0.0)
    throw Error(ErrorKind::zero_mark, "P(Q > 0) = 0 for a nonhomogeneous recursion");
  resolved["c_scale"] = m.c_scale;
  resolved["coupling"] = "iid-independent";
  m.source = resolved;
  return m;
}

inline std::uint64_t model_hash(const VectorModel& m) { return fnv1a(m.source.dump()); }

namespace presets {

inline const double kLn13 = std::log(1.3);
inline const double kModelBMu = std::log(2.0) - 0.5;

// Model A: N in {1, 2} w.p. {0.7, 0.3}, C lognormal(-1.5 ln 1.3, ln 1.3), Q = 0.
// phi(1) = phi(2) = 1: the critical homogeneous case with alpha = 2.
// Model B: N in {0, 1} w.p. 1/2, C lognormal(ln 2 - 1/2, 1), Q = 1; alpha = 1.
// Model B' is Model B with every weight scaled by 0.9.
inline nlohmann::json spec(const std::string& name) {
  using nlohmann::json;
  if (name == "A" || name == "A'") {
    json j = {{"N", {{"family", "two-point"}, {"values", {1, 2}}, {"probs", {0.7, 0.3}}}},
              {"C", {{"family", "lognormal"}, {"mu", -1.5 * kLn13}, {"sigma2", kLn13}}},
              {"Q", {{"family", "deterministic"}, {"value", 0.0}}},
              {"c_scale", 1.0}};
    if (name == "A'") {
      j["Q"]["value"] = 1.0;
      j["c_scale"] = 0.9;
    }
    return j;
  }
  if (name == "B" || name == "B'" || name == "B-max") {
    json j = {{"N", {{"family", "two-point"}, {"values", {0, 1}}, {"probs", {0.5, 0.5}}}},
              {"C", {{"family", "lognormal"}, {"mu", kModelBMu}, {"sigma2", 1.0}}},
              {"Q", {{"family", "deterministic"}, {"value", 1.0}}},
              {"c_scale", name == "B'" ? 0.9 : 1.0}};
    return j;
  }
  if (name == "uniform") {
    return {{"N", {{"family", "deterministic"}, {"value", 3}}},
            {"C", {{"family", "uniform"}, {"upper", 0.8}}},
            {"Q", {{"family", "deterministic"}, {"value", 1.0}}},
            {"c_scale", 1.0}};
  }
  throw Error(ErrorKind::invalid_config, "unknown model preset '" + name + "'");
}

inline VectorModel model_a() { return make_model(spec("A")); }
inline VectorModel model_a_prime() { return make_model(spec("A'")); }
inline VectorModel model_b() { return make_model(spec("B")); }
inline VectorModel model_b_prime() { return make_model(spec("B'")); }
inline VectorModel uniform_model() { return make_model(spec("uniform")); }

}  // namespace presets

}  // namespace wbt
