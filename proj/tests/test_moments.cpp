#include <cmath>

#include <gtest/gtest.h>

#include "wbt/moments.hpp"

using namespace wbt;

namespace {

VectorModel halving(double q = 1.0, unsigned n = 1) {
  return make_model({{"N", {{"family", "deterministic"}, {"value", n}}},
                     {"C", {{"family", "deterministic"}, {"value", 0.5}}},
                     {"Q", {{"family", "deterministic"}, {"value", q}}}});
}

TEST(Moments, MeanWn) {
  EXPECT_NEAR(mean_wn_exact(presets::model_b_prime(), 3), 0.729, 1e-12);
  EXPECT_NEAR(mean_wn_exact(presets::model_b(), 7), 1.0, 1e-12);
  EXPECT_NEAR(mean_wn_exact(presets::model_a(), 9, Marks::unit), 1.0, 1e-12);
}

TEST(Moments, ExactMeanR) {
  EXPECT_NEAR(exact_mean_R(presets::model_b_prime()).value, 10.0, 1e-12);
  EXPECT_FALSE(exact_mean_R(presets::model_b()).finite());
  EXPECT_NEAR(exact_mean_R(halving(2.0)).value, 4.0, 1e-12);
}

TEST(Moments, DeterministicKBound) {
  const auto b = wn_moment_bound(halving(), 2.0, 5);
  ASSERT_TRUE(b.applicable);
  EXPECT_NEAR(b.value, 0.0625, 1e-15);
  EXPECT_LE(std::pow(0.25, 5), b.value);
}

TEST(Moments, BetaOneBoundIsExactMean) {
  for (const auto& m : {presets::model_b_prime(), presets::model_a_prime(), halving()})
    EXPECT_NEAR(wn_moment_bound(m, 1.0, 6).value, mean_wn_exact(m, 6), 1e-14);
}

TEST(Moments, TruncationBoundHalving) {
  EXPECT_NEAR(truncation_bound(halving(), 1.0, 10).value, std::pow(2.0, -10), 1e-16);
  EXPECT_TRUE(std::isinf(truncation_bound(presets::model_b(), 1.0, 10).value));
}

TEST(Moments, EstimateMomentConstant) {
  const std::vector<double> ones(500, 1.0);
  const auto e = estimate_moment(ones, 2.7);
  EXPECT_EQ(e.estimate.value, 1.0);
  EXPECT_EQ(e.estimate.std_error, 0.0);
  EXPECT_FALSE(e.unreliable);
}

TEST(Moments, EstimateMomentFlagsHeavyTail) {
  std::vector<double> v(100000);
  SplitMix64 eng(2);
  for (auto& x : v) x = std::pow(eng.uniform_open(), -0.5);
  const auto e = estimate_moment(v, 3.0);
  EXPECT_TRUE(e.unreliable);
  EXPECT_FALSE(estimate_moment(v, 1.0).unreliable);
}

TEST(Moments, SumInequalityHand) {
  const std::vector<double> y(10, 1.0);
  const auto r = verify_sum_inequality(halving(1.0, 2), 2.0, y, 1000, 1);
  EXPECT_NEAR(r.estimate.value, 0.5, 1e-15);
  EXPECT_NEAR(r.bound.value, 1.0, 1e-15);
  EXPECT_TRUE(r.holds);
  const auto single = verify_sum_inequality(presets::model_b(), 1.5, y, 1000, 1);
  EXPECT_EQ(single.estimate.value, 0.0);
  EXPECT_TRUE(single.holds);
}

TEST(Moments, SumInequalityModelA) {
  SampleOptions o;
  o.kind = RecursionKind::homogeneous;
  o.depth = 12;
  const auto y = run_batch(presets::model_a(), o, 20000, 3);
  const auto r = verify_sum_inequality(presets::model_a(), 1.5, y.values, 100000, 4);
  EXPECT_TRUE(r.holds) << to_json(r).dump();
}

TEST(Moments, GridSmall) {
  GridOptions opt;
  opt.max_depth = 4;
  opt.reps = 20000;
  for (const auto& [m, marks] : {std::pair{presets::model_b_prime(), Marks::model},
                                 std::pair{presets::model_a(), Marks::unit},
                                 std::pair{presets::model_a_prime(), Marks::model}}) {
    for (const auto& r : moment_grid(m, marks, opt))
      if (r.bound.applicable) EXPECT_TRUE(r.holds) << to_json(r).dump();
  }
}

TEST(Moments, GridCatchesCorruptK) {
  GridOptions opt;
  opt.max_depth = 3;
  opt.reps = 20000;
  opt.betas = {2.0};
  opt.k_factor = 1e-3;
  bool any_fail = false;
  for (const auto& r : moment_grid(presets::model_a_prime(), Marks::model, opt))
    any_fail = any_fail || (r.bound.applicable && !r.holds);
  EXPECT_TRUE(any_fail);
}

TEST(Moments, GridSkipsUnmetPreconditions) {
  GridOptions opt;
  opt.max_depth = 1;
  opt.reps = 1000;
  opt.betas = {1.5};
  for (const auto& r : moment_grid(presets::model_b_prime(), Marks::model, opt))
    EXPECT_FALSE(r.bound.applicable);
}

}  // namespace
