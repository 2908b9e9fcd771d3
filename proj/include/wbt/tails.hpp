#pragma once

// Tail-index and tail-constant estimation from sample batches.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/error.hpp"
#include "wbt/random.hpp"
#include "wbt/stats.hpp"

namespace wbt {

inline std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

struct SurvivalPoint {
  double t = 0.0;
  double fraction = 0.0;
  double std_error = 0.0;
};

/// Empirical P(R > t) on `grid` with binomial standard errors.
inline std::vector<SurvivalPoint> survival_points(std::span<const double> sorted,
                                                  std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw Error(ErrorKind::invalid_parameter, "survival grid must be sorted ascending");
  std::vector<SurvivalPoint> out;
  out.reserve(grid.size());
  const double n = static_cast<double>(sorted.size());
  for (double t : grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    const double p = n > 0 ? static_cast<double>(above) / n : 0.0;
    out.push_back({t, p, n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0});
  }
  return out;
}

// Log-spaced grid between the smallest positive value and the maximum.
inline std::vector<double> log_grid(std::span<const double> sorted, std::size_t points = 60) {
  std::vector<double> grid;
  const auto first = std::upper_bound(sorted.begin(), sorted.end(), 0.0);
  if (first == sorted.end() || points < 2) return grid;
  const double lo = std::log(*first), hi = std::log(sorted.back());
  for (std::size_t i = 0; i < points; ++i)
    grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / (points - 1.0)));
  return grid;
}

inline std::size_t default_hill_k(std::size_t n) {
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.6)));
}

/// Hill estimator from the k largest order statistics, SE = alpha / sqrt(k).
inline Estimate hill_estimator(std::span<const double> sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  if (k < 2 || k >= n) throw Error(ErrorKind::invalid_parameter, "Hill needs 2 <= k < n");
  const double threshold = sorted[n - 1 - k];
  if (!(threshold > 0.0))
    throw Error(ErrorKind::invalid_parameter, "Hill needs positive values in the tail window");
  double s = 0.0;
  const double log_threshold = std::log(threshold);
  for (std::size_t i = n - k; i < n; ++i) s += std::log(sorted[i]) - log_threshold;
  if (!(s > 0.0)) throw Error(ErrorKind::invalid_parameter, "Hill window has no spread");
  const double a = static_cast<double>(k) / s;
  return {a, a / std::sqrt(static_cast<double>(k))};
}

struct HillPoint {
  std::size_t k = 0;
  Estimate alpha;
};

struct HillSweep {
  std::vector<HillPoint> points;
  double drift = 0.0;  // relative change of alpha-hat across the sweep
  bool unstable = false;
};

/// Hill estimates on a geometric k grid from n^0.4 to n^0.75. The fitted
/// slope of alpha-hat against log k, times the log-width of the grid and
/// relative to the mean estimate, measures the absence of a plateau; above
/// `threshold` the sweep is flagged.
inline HillSweep hill_sweep(std::span<const double> sorted, std::size_t points = 20,
                            double threshold = 0.2) {
  HillSweep out;
  const double n = static_cast<double>(sorted.size());
  const double lo = std::max(2.0, std::pow(n, 0.4));
  const double hi = std::min(n - 1.0, std::pow(n, 0.75));
  if (hi <= lo) return out;
  std::size_t last = 0;
  for (std::size_t i = 0; i < points; ++i) {
    const double kd = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1.0));
    const auto k = static_cast<std::size_t>(std::llround(kd));
    if (k == last) continue;
    last = k;
    try {
      out.points.push_back({k, hill_estimator(sorted, k)});
    } catch (const Error&) {
    }
  }
  if (out.points.size() < 3) return out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(out.points.size());
  for (const auto& p : out.points) {
    const double x = std::log(static_cast<double>(p.k));
    sx += x;
    sy += p.alpha.value;
    sxx += x * x;
    sxy += x * p.alpha.value;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double width = std::log(static_cast<double>(out.points.back().k)) -
                       std::log(static_cast<double>(out.points.front().k));
  out.drift = std::abs(slope) * width / (sy / m);
  out.unstable = out.drift > threshold;
  return out;
}

struct PlateauEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
  std::size_t resamples = 0;
};

namespace detail {

// Median of t^alpha P(R > t) over order statistics in the quantile band.
inline double plateau_median(std::span<const double> sorted, double alpha, double q_lo, double q_hi,
                             std::vector<double>& buf, double* t_lo = nullptr,
                             double* t_hi = nullptr) {
  const std::size_t n = sorted.size();
  const auto lo = static_cast<std::size_t>(std::floor(q_lo * static_cast<double>(n)));
  const auto hi = std::min(n - 1, static_cast<std::size_t>(std::ceil(q_hi * static_cast<double>(n))));
  buf.clear();
  for (std::size_t i = lo; i <= hi; ++i) {
    const double t = sorted[i];
    if (!(t > 0.0)) continue;
    // the count of values strictly above t, robust to ties
    const auto above = sorted.end() - std::upper_bound(sorted.begin() + i, sorted.end(), t);
    buf.push_back(std::pow(t, alpha) * static_cast<double>(above) / static_cast<double>(n));
  }
  if (t_lo) *t_lo = sorted[lo];
  if (t_hi) *t_hi = sorted[hi];
  if (buf.empty()) return 0.0;
  const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
  std::nth_element(buf.begin(), mid, buf.end());
  if (buf.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(buf.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace detail

/// Plateau estimate of H in P(R > t) ~ H t^-alpha: the median of
/// t^alpha P(R > t) over the empirical (q_lo, q_hi) quantile band, with a
/// percentile bootstrap CI over replications.
inline PlateauEstimate plateau_H(std::span<const double> sorted, double alpha, double q_lo = 0.99,
                                 double q_hi = 0.9995, std::size_t resamples = 200,
                                 std::uint64_t seed = 1) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_parameter, "plateau needs alpha > 0");
  if (!(q_lo > 0.9 && q_lo < q_hi && q_hi < 0.9999))
    throw Error(ErrorKind::invalid_parameter, "quantile band must satisfy 0.9 < q_lo < q_hi < 0.9999");
  const std::size_t n = sorted.size();
  const double band = (q_hi - q_lo) * static_cast<double>(n);
  if (band < 50.0)
    throw Error(ErrorKind::precondition,
                "fewer than 50 tail points in the quantile band (n = " + std::to_string(n) + ")");
  PlateauEstimate out;
  std::vector<double> buf;
  out.value = detail::plateau_median(sorted, alpha, q_lo, q_hi, buf, &out.t_lo, &out.t_hi);
  out.points = buf.size();
  out.resamples = resamples;
  if (resamples == 0) {
    out.ci_lo = out.ci_hi = out.value;
    return out;
  }
  // A resample of sorted data is sorted once expanded by its multinomial counts.
  std::vector<double> boot;
  boot.reserve(resamples);
  std::vector<std::uint32_t> counts(n);
  std::vector<double> resample(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    SplitMix64 eng(replication_key(seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) ++counts[pick(eng)];
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::uint32_t c = 0; c < counts[i]; ++c) resample[pos++] = sorted[i];
    boot.push_back(detail::plateau_median(resample, alpha, q_lo, q_hi, buf));
  }
  std::sort(boot.begin(), boot.end());
  out.ci_lo = sorted_quantile(boot, 0.025);
  out.ci_hi = sorted_quantile(boot, 0.975);
  return out;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw Error(ErrorKind::invalid_parameter, "KS needs nonempty samples");
  const auto a = sorted_copy(xs);
  const auto b = sorted_copy(ys);
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

struct StabilityResult {
  double ks = 0.0;
  double threshold = 0.02;
  bool pass = false;
};

/// KS distance between batches at two depths; pass when <= threshold.
inline StabilityResult stability_diagnostic(std::span<const double> batch_n,
                                            std::span<const double> batch_n2,
                                            double threshold = 0.02) {
  StabilityResult r;
  r.ks = ks_distance(batch_n, batch_n2);
  r.threshold = threshold;
  r.pass = r.ks <= threshold;
  return r;
}

inline nlohmann::json to_json(const PlateauEstimate& p) {
  return {{"value", p.value},         {"ci", {p.ci_lo, p.ci_hi}}, {"t_range", {p.t_lo, p.t_hi}},
          {"points", p.points},       {"resamples", p.resamples}};
}

}  // namespace wbt
