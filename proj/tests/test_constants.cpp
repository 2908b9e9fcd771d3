#include <cmath>

#include <gtest/gtest.h>

#include "wbt/constants.hpp"
#include "wbt/engine.hpp"

using namespace wbt;

namespace {

TEST(Constants, ClosedForms) {
  EXPECT_NEAR(h_closed_form(presets::model_b(), 1.0, RecursionKind::linear), 0.8381195683928104, 1e-12);
  EXPECT_NEAR(h_closed_form(presets::model_a(), 2.0, RecursionKind::homogeneous), 1.353193379896474, 1e-12);
  const auto single = make_model({{"N", {{"family", "deterministic"}, {"value", 1}}},
                                  {"C", {{"family", "lognormal"}, {"mu", -0.5}, {"sigma2", 1.0}}},
                                  {"Q", {{"family", "deterministic"}, {"value", 0.0}}}});
  EXPECT_EQ(h_closed_form(single, 2.0, RecursionKind::homogeneous), 0.0);
  EXPECT_THROW(h_closed_form(presets::model_b(), 1.5, RecursionKind::linear), Error);
  EXPECT_THROW(h_closed_form(presets::model_b(), 1.0, RecursionKind::max), Error);
}

TEST(Constants, LinearAlphaTwoAgainstMonteCarlo) {
  // N in {0,1}, C lognormal with phi(2) = 1 and rho < 1
  const double mu = -1.0;  // E[C^2] = exp(2mu + 2 s2) = 2 needs s2 = (ln 2 + 2)/2
  const double s2 = (std::log(2.0) + 2.0) / 2.0;
  const auto m = make_model({{"N", {{"family", "two-point"}, {"values", {0, 1}}, {"probs", {0.5, 0.5}}}},
                             {"C", {{"family", "lognormal"}, {"mu", mu}, {"sigma2", s2}}},
                             {"Q", {{"family", "deterministic"}, {"value", 1.0}}}});
  const auto sol = solve_alpha(m);
  ASSERT_NEAR(sol.alpha, 2.0, 1e-9);
  const double h = h_closed_form(m, 2.0, RecursionKind::linear);
  // N <= 1: numerator E[Q^2] + 2 E[R] E[Q] E[N] E[C]
  const double ec = std::exp(mu + 0.5 * s2);
  const double er = 1.0 / (1.0 - 0.5 * ec);
  EXPECT_NEAR(h, (1.0 + 2.0 * er * 0.5 * ec) / (2.0 * sol.mu), 1e-12);
}

TEST(Constants, NoChildrenGivesOneOverAlphaMu) {
  const auto m = make_model({{"N", {{"family", "deterministic"}, {"value", 0}}},
                             {"C", {{"family", "deterministic"}, {"value", 0.5}}},
                             {"Q", {{"family", "deterministic"}, {"value", 1.0}}}});
  CramerSolution sol;
  sol.alpha = 1.7;
  sol.mu = 0.3;
  const std::vector<double> r(1000, 1.0);
  const auto e = h_mc_general(m, sol, RecursionKind::linear, r, 1000, 1);
  EXPECT_NEAR(e.estimate.value, 1.0 / (1.7 * 0.3), 1e-12);
}

TEST(Constants, ModelBRoutesAgree) {
  const auto m = presets::model_b();
  const auto sol = solve_alpha(m);
  SampleOptions o;
  const auto batch = run_batch(m, o, 20000, 1);
  const auto e = h_mc_general(m, sol, RecursionKind::linear, batch.values, 20000, 2);
  const double h = h_closed_form(m, sol.alpha, RecursionKind::linear);
  EXPECT_NEAR(e.estimate.value, h, 3.0 * e.estimate.std_error + 1e-12);
  const auto b = h_bounds(m, sol, RecursionKind::linear);
  ASSERT_TRUE(b.lower && b.upper);
  EXPECT_NEAR(*b.lower, h, 1e-9);
  EXPECT_NEAR(*b.upper, h, 1e-9);
}

TEST(Constants, ModelAMonteCarloRoute) {
  const auto m = presets::model_a();
  const auto sol = solve_alpha(m);
  SampleOptions o;
  o.kind = RecursionKind::homogeneous;
  o.depth = 14;
  const auto batch = run_batch(m, o, 20000, 5);
  const auto e = h_mc_general(m, sol, RecursionKind::homogeneous, batch.values, 200000, 6);
  EXPECT_NEAR(e.estimate.value, 1.353193379896474, 3.0 * e.estimate.std_error);
  EXPECT_GT(e.estimate.value, 0.0);
}

TEST(Constants, BoundsBelowOne) {
  const auto m = make_model({{"preset", "B"}, {"c_scale", 1.314277119069650}});
  const auto sol = solve_alpha(m);
  const auto b = h_bounds(m, sol, RecursionKind::linear);
  ASSERT_TRUE(b.upper.has_value());
  EXPECT_FALSE(b.lower.has_value());
  EXPECT_NEAR(*b.upper, 0.9870234248170348, 1e-8);
}

TEST(Constants, HomogeneousProbeBound) {
  // alpha = 1.5 is a probe only; mu is taken from the actual root
  const auto m = presets::model_a();
  SampleOptions o;
  o.kind = RecursionKind::homogeneous;
  o.depth = 10;
  const auto batch = run_batch(m, o, 5000, 2);
  const double er = mean_estimate(batch.values).value;
  const double v = homogeneous_upper_bound(m, 1.5, solve_alpha(m).mu, er);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 0.0);
}

}  // namespace
