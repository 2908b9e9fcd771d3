#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace wbt {

/// A point estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Welford accumulator.
class RunningMoments {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  double std_error() const noexcept {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }
  Estimate estimate() const noexcept { return {mean(), std_error()}; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline Estimate mean_estimate(std::span<const double> xs) {
  RunningMoments acc;
  for (double x : xs) acc.add(x);
  return acc.estimate();
}

/// Delete-one-group jackknife of the mean of `xs`.
///
/// Observations are split into `groups` contiguous blocks; the spread of
/// the leave-one-block-out means gives the standard error. For the plain
/// mean this coincides with the batch-means estimator.
inline Estimate grouped_jackknife_mean(std::span<const double> xs, std::size_t groups = 100) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  groups = std::clamp<std::size_t>(groups, 1, n);
  std::vector<double> sums(groups, 0.0);
  std::vector<std::size_t> counts(groups, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = i * groups / n;
    sums[g] += xs[i];
    ++counts[g];
    total += xs[i];
  }
  const double full = total / static_cast<double>(n);
  if (groups < 2) return {full, 0.0};
  double mean_loo = 0.0;
  std::vector<double> loo(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    loo[g] = (total - sums[g]) / static_cast<double>(n - counts[g]);
    mean_loo += loo[g];
  }
  mean_loo /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  const double g = static_cast<double>(groups);
  return {full, std::sqrt((g - 1.0) / g * ss)};
}

// Jackknife standard error from per-group estimates that were each
// computed on an independent slice of the data.
inline Estimate group_means_estimate(std::span<const double> group_values,
                                     std::span<const std::size_t> group_sizes) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t g = 0; g < group_values.size(); ++g) {
    total += group_values[g] * static_cast<double>(group_sizes[g]);
    n += group_sizes[g];
  }
  if (n == 0) return {};
  const double full = total / static_cast<double>(n);
  const std::size_t groups = group_values.size();
  if (groups < 2) return {full, 0.0};
  std::vector<double> loo(groups);
  double mean_loo = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const double rest = total - group_values[g] * static_cast<double>(group_sizes[g]);
    loo[g] = rest / static_cast<double>(n - group_sizes[g]);
    mean_loo += loo[g];
  }
  mean_loo /= static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  const double gd = static_cast<double>(groups);
  return {full, std::sqrt((gd - 1.0) / gd * ss)};
}

// Linear-interpolated empirical quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

}  // namespace wbt
