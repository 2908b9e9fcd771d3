#pragma once

// The tilted one-step measure eta(du) = e^(alpha u) E[sum 1(log C_j in du)]
// and a dual Monte Carlo check that the level-n tree measure equals the
// n-fold convolution of eta.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/engine.hpp"
#include "wbt/model.hpp"
#include "wbt/stats.hpp"

namespace wbt {

enum class TestFunction { constant_one, identity, indicator, exp_bounded };

inline const char* to_string(TestFunction g) {
  switch (g) {
    case TestFunction::constant_one: return "constant-1";
    case TestFunction::identity: return "identity-u";
    case TestFunction::indicator: return "indicator";
    case TestFunction::exp_bounded: return "exp-bounded";
  }
  return "?";
}

inline TestFunction parse_test_function(const std::string& name) {
  if (name == "constant-1") return TestFunction::constant_one;
  if (name == "identity-u") return TestFunction::identity;
  if (name == "indicator") return TestFunction::indicator;
  if (name == "exp-bounded") return TestFunction::exp_bounded;
  throw Error(ErrorKind::invalid_parameter, "unknown test function '" + name + "'");
}

// g(u); `x` is the threshold of the indicator.
inline double evaluate(TestFunction g, double u, double x) {
  switch (g) {
    case TestFunction::constant_one: return 1.0;
    case TestFunction::identity: return u;
    case TestFunction::indicator: return u <= x ? 1.0 : 0.0;
    case TestFunction::exp_bounded: return std::exp(-std::abs(u));
  }
  return 0.0;
}

/// eta for the iid-independent coupling: E[N] times the law of log C
/// exponentially tilted by alpha. Every supported weight family tilts in
/// closed form.
struct TiltedMeasure {
  double alpha = 0.0;
  double total_mass = 0.0;  // phi(alpha)
  std::string sampler = "closed-form-tilt";
  WeightLaw base;
  double c_scale = 1.0;
};

inline TiltedMeasure make_tilted_measure(const VectorModel& m, double alpha, double tol = 1e-10) {
  TiltedMeasure t;
  t.alpha = alpha;
  t.total_mass = phi(m, alpha).value;
  t.base = m.weight;
  t.c_scale = m.c_scale;
  if (!(std::abs(t.total_mass - 1.0) <= tol))
    throw Error(ErrorKind::precondition,
                "eta needs phi(alpha) = 1, got " + std::to_string(t.total_mass));
  if (std::holds_alternative<Constant>(m.weight) && std::get<Constant>(m.weight).value == 0.0)
    throw Error(ErrorKind::unsupported, "eta is undefined for C = 0");
  return t;
}

/// One draw u ~ eta.
template <class Engine>
double sample_eta(const TiltedMeasure& t, Engine& eng) {
  const double log_scale = std::log(t.c_scale);
  return log_scale +
         std::visit(detail::overloaded{
                        [&](const Constant& d) { return std::log(d.value); },
                        [&](const LogNormal& d) {
                          const double sd = std::sqrt(d.sigma2);
                          return std::normal_distribution<double>(d.mu + t.alpha * d.sigma2, sd)(eng);
                        },
                        [&](const UniformZeroTo& d) {
                          // density of C^alpha-tilted U(0,b) is (alpha+1) x^alpha / b^(alpha+1)
                          const double u = std::uniform_real_distribution<double>(0.0, 1.0)(eng);
                          return std::log(d.upper) + std::log(u) / (t.alpha + 1.0);
                        },
                        [&](const ScaledBeta& d) {
                          const double x = std::gamma_distribution<double>(d.a + t.alpha, 1.0)(eng);
                          const double y = std::gamma_distribution<double>(d.b, 1.0)(eng);
                          return std::log(d.scale) + std::log(x) - std::log(x + y);
                        },
                    },
                    t.base);
}

inline double sample_eta(const TiltedMeasure& t, std::uint64_t key) {
  SplitMix64 eng(key);
  return sample_eta(t, eng);
}

struct DualEstimateReport {
  unsigned n = 0;
  TestFunction g = TestFunction::constant_one;
  double x = 0.0;
  Estimate lhs;  // tree side
  Estimate rhs;  // convolution side
  std::optional<double> closed_form;
  bool agree = false;
};

inline nlohmann::json to_json(const DualEstimateReport& r) {
  nlohmann::json j{{"n", r.n},
                   {"g", to_string(r.g)},
                   {"lhs", {{"value", r.lhs.value}, {"std_error", r.lhs.std_error}}},
                   {"rhs", {{"value", r.rhs.value}, {"std_error", r.rhs.std_error}}},
                   {"agree", r.agree}};
  if (r.g == TestFunction::indicator) j["x"] = r.x;
  if (r.closed_form) j["closed_form"] = *r.closed_form;
  return j;
}

// Sum over generation n of Pi^alpha g(log Pi); the horizon marks are unused.
struct RenewalFold {
  static constexpr bool tracks_path = true;
  double alpha = 0.0;
  TestFunction g = TestFunction::constant_one;
  double x = 0.0;
  double horizon(std::uint64_t, double, double log_pi) const {
    if (std::isinf(log_pi)) return 0.0;
    return std::exp(alpha * log_pi) * evaluate(g, log_pi, x);
  }
  static double combine(double acc, double, double v) { return acc + v; }
  static double finish(double, double acc, double) { return acc; }
};

/// Tree-side and convolution-side estimates of the integral of g against
/// the level-n measure. Both sides use `reps` replications on keyed streams
/// and agree when |lhs - rhs| <= 3 sqrt(se_lhs^2 + se_rhs^2).
inline DualEstimateReport verify_product_measure(const VectorModel& m, double alpha, unsigned n,
                                                 TestFunction g, std::size_t reps, std::uint64_t seed,
                                                 double x = 0.0, unsigned workers = 1) {
  if (n < 1 || n > 4) throw Error(ErrorKind::invalid_parameter, "renewal check needs n in {1,..,4}");
  if (reps < 2) throw Error(ErrorKind::invalid_parameter, "renewal check needs reps >= 2");
  const TiltedMeasure eta = make_tilted_measure(m, alpha);

  DualEstimateReport rep;
  rep.n = n;
  rep.g = g;
  rep.x = x;

  std::vector<double> lhs(reps), rhs(reps);
  RenewalFold fold;
  fold.alpha = alpha;
  fold.g = g;
  fold.x = x;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    TraversalScratch scratch;
    while (true) {
      const std::size_t begin = next.fetch_add(1024);
      if (begin >= reps) break;
      for (std::size_t i = begin; i < std::min(reps, begin + 1024); ++i) {
        const auto r = traverse(m, fold, n, replication_key(seed, i), kDefaultBudget, scratch);
        lhs[i] = r.value;
        SplitMix64 eng(side_key(replication_key(seed, i), 0x7e7a));
        double u = 0.0;
        for (unsigned k = 0; k < n; ++k) u += sample_eta(eta, eng);
        rhs[i] = evaluate(g, u, x);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  rep.lhs = mean_estimate(lhs);
  rep.rhs = mean_estimate(rhs);
  if (g == TestFunction::constant_one) rep.closed_form = std::pow(eta.total_mass, n);
  if (g == TestFunction::identity) rep.closed_form = n * phi_prime(m, alpha).value;
  const double se = std::hypot(rep.lhs.std_error, rep.rhs.std_error);
  const double slack = 1e-12 * std::max(1.0, std::abs(rep.rhs.value));
  rep.agree = std::abs(rep.lhs.value - rep.rhs.value) <= 3.0 * se + slack;
  return rep;
}

}  // namespace wbt
