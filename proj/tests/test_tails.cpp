#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wbt/tails.hpp"

using namespace wbt;

namespace {

std::vector<double> pareto(double alpha, std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::vector<double> v(n);
  SplitMix64 eng(seed);
  for (auto& x : v) x = scale * std::pow(eng.uniform_open(), -1.0 / alpha);
  return v;
}

TEST(Tails, SurvivalOfConstants) {
  const std::vector<double> ones(100, 1.0);
  const std::vector<double> grid{0.5, 2.0};
  const auto s = survival_points(ones, grid);
  EXPECT_EQ(s[0].fraction, 1.0);
  EXPECT_EQ(s[1].fraction, 0.0);
}

TEST(Tails, SurvivalByHand) {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  const std::vector<double> grid{0.0, 1.0, 10.0, 10.5, 99.0, 100.0};
  const auto s = survival_points(v, grid);
  const double want[] = {1.0, 0.99, 0.90, 0.90, 0.01, 0.0};
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(s[i].fraction, want[i]);
  const std::vector<double> unsorted{2.0, 1.0};
  EXPECT_THROW(survival_points(v, unsorted), Error);
}

TEST(Tails, SurvivalPareto) {
  const auto v = sorted_copy(pareto(2.0, 200000, 4));
  const std::vector<double> grid{10.0};
  const auto s = survival_points(v, grid);
  EXPECT_NEAR(s[0].fraction, 0.01, 3.0 * s[0].std_error);
}

TEST(Tails, HillPareto) {
  const auto v2 = sorted_copy(pareto(2.0, 1000000, 5));
  EXPECT_NEAR(hill_estimator(v2, 10000).value, 2.0, 0.1);
  const auto v1 = sorted_copy(pareto(1.0, 1000000, 6, 3.0));
  const auto h = hill_estimator(v1, 10000);
  EXPECT_NEAR(h.value, 1.0, 0.05);
  EXPECT_NEAR(h.std_error, h.value / 100.0, 1e-12);
  EXPECT_FALSE(hill_sweep(v2).unstable);
}

TEST(Tails, HillFlagsExponential) {
  std::vector<double> v(1000000);
  SplitMix64 eng(8);
  for (auto& x : v) x = -std::log(eng.uniform_open());
  std::sort(v.begin(), v.end());
  EXPECT_TRUE(hill_sweep(v).unstable);
}

TEST(Tails, HillPreconditions) {
  const std::vector<double> v{0.0, 0.0, 1.0, 2.0};
  EXPECT_THROW(hill_estimator(v, 1), Error);
  EXPECT_THROW(hill_estimator(v, 3), Error);
}

TEST(Tails, PlateauPareto) {
  const auto v = sorted_copy(pareto(2.0, 400000, 9));
  const auto p = plateau_H(v, 2.0, 0.99, 0.9995, 100, 3);
  EXPECT_NEAR(p.value, 1.0, 0.1);
  EXPECT_LE(p.ci_lo, 1.0);
  EXPECT_GE(p.ci_hi, 1.0);
  EXPECT_GT(p.t_hi, p.t_lo);
}

TEST(Tails, PlateauScaleCovariance) {
  const auto v = sorted_copy(pareto(1.5, 100000, 10));
  std::vector<double> s(v);
  for (auto& x : s) x *= 3.0;
  const double h = plateau_H(v, 1.5, 0.99, 0.9995, 0).value;
  const double hs = plateau_H(s, 1.5, 0.99, 0.9995, 0).value;
  EXPECT_NEAR(hs, h * std::pow(3.0, 1.5), 1e-12 * hs);
}

TEST(Tails, PlateauNeedsPoints) {
  const auto v = sorted_copy(pareto(2.0, 5000, 11));
  EXPECT_THROW(plateau_H(v, 2.0), Error);
}

TEST(Tails, KsIdenticalIsZero) {
  const auto v = pareto(2.0, 1000, 12);
  EXPECT_EQ(stability_diagnostic(v, v).ks, 0.0);
  const std::vector<double> a{1.0, 2.0}, b{3.0, 4.0};
  EXPECT_EQ(ks_distance(a, b), 1.0);
}

TEST(Tails, KsIgnoresInputOrderAndHandlesTies) {
  const std::vector<double> a{1.0, 3.0, 1.0, 2.0}, b{2.0, 1.0, 3.0, 1.0};
  EXPECT_EQ(ks_distance(a, b), 0.0);
  const std::vector<double> c{1.0, 1.0, 1.0, 5.0};
  EXPECT_DOUBLE_EQ(ks_distance(a, c), 0.25);
}

}  // namespace
