#include <cmath>

#include <gtest/gtest.h>

#include "wbt/cramer.hpp"

using namespace wbt;

namespace {

TEST(Cramer, ModelBRootIsOne) {
  const auto s = solve_alpha(presets::model_b());
  EXPECT_NEAR(s.alpha, 1.0, 1e-10);
  EXPECT_NEAR(s.mu, 1.193147180559945, 1e-9);
  EXPECT_EQ(s.root_kind, RootKind::unique_root);
}

TEST(Cramer, ModelASecondRoot) {
  const auto s = solve_alpha(presets::model_a());
  EXPECT_EQ(s.root_kind, RootKind::second_root_of_critical_pair);
  EXPECT_NEAR(s.alpha, 2.0, 1e-10);
  EXPECT_NEAR(s.mu, 0.1311821322337455, 1e-9);
}

TEST(Cramer, ModelBPrimeRoot) {
  const auto s = solve_alpha(presets::model_b_prime());
  EXPECT_NEAR(s.alpha, 1.092891470600748, 1e-10);
}

TEST(Cramer, ScaledModelB) {
  const auto m = make_model({{"preset", "B"}, {"c_scale", 1.314277119069650}});
  const auto s = solve_alpha(m);
  EXPECT_NEAR(s.alpha, 0.8, 1e-9);
  EXPECT_NEAR(s.mu, 1.266433975699932, 1e-8);
}

TEST(Cramer, DecreasingRootIsRejectedButReported) {
  try {
    solve_alpha(presets::uniform_model());
    FAIL();
  } catch (const ContractionRootError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::contraction_root);
    EXPECT_NEAR(e.solution.alpha, 1.263136261310382, 1e-10);
    EXPECT_LT(e.solution.mu, 0.0);
  }
}

TEST(Cramer, NoSignChange) {
  try {
    solve_alpha(presets::model_b(), {1.5, 3.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_sign_change);
  }
}

TEST(Cramer, BadBracket) {
  EXPECT_THROW(solve_alpha(presets::model_b(), {2.0, 1.0}), Error);
}

TEST(Cramer, ConditionsModelB) {
  const auto m = presets::model_b();
  const auto r = check_conditions(m, solve_alpha(m), RecursionKind::linear);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  ASSERT_NE(r.find("E[(sum C^(alpha/(1+eps)))^(1+eps)]<inf"), nullptr);
}

TEST(Cramer, ConditionsModelA) {
  const auto m = presets::model_a();
  const auto r = check_conditions(m, solve_alpha(m), RecursionKind::homogeneous);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_NEAR(r.find("P(N~>=2)>0")->value, 0.3, 1e-15);
}

TEST(Cramer, DeterministicWeightsFailNonarithmetic) {
  nlohmann::json spec = {{"N", {{"family", "two-point"}, {"values", {0, 1}}, {"probs", {0.5, 0.5}}}},
                         {"C", {{"family", "deterministic"}, {"value", 2.0}}},
                         {"Q", {{"family", "deterministic"}, {"value", 1.0}}}};
  const auto m = make_model(spec);
  const auto s = solve_alpha(m);
  EXPECT_NEAR(s.alpha, 1.0, 1e-10);
  const auto r = check_conditions(m, s, RecursionKind::linear);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.find("nonarithmetic")->status, CheckStatus::fail);
}

TEST(Cramer, LinearAlphaAboveOneNeedsContraction) {
  // phi = 1 twice for A'; the lower root has phi' < 0
  const auto m = presets::model_a_prime();
  EXPECT_THROW(solve_alpha(m), Error);
  const auto s = solve_alpha(m, {1.0, 8.0});
  EXPECT_GT(s.alpha, 3.0);
  const auto r = check_conditions(m, s, RecursionKind::linear);
  EXPECT_EQ(r.find("E[sum C]<1")->status, CheckStatus::pass);
  EXPECT_TRUE(r.passed());
  const auto rm = check_conditions(m, s, RecursionKind::max);
  EXPECT_EQ(rm.find("E[sum C]<1"), nullptr);
}

}  // namespace
