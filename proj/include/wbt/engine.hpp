#pragma once

// Depth-recursive sampling of R^(n), W_n, the max and max-plus recursions
// and the iterates R*_n on weighted branching trees.
//
// Nothing is materialised: every node draws (Q, N, C_1..C_N) from its own
// keyed stream, children are visited depth-first on an explicit work stack
// and their values folded into the parent. Memory is O(depth + live
// weights); the tree realised for a replication depends only on
// (seed, replication index), so batches coincide across truncation depths,
// recursion kinds and worker counts.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/error.hpp"
#include "wbt/model.hpp"
#include "wbt/moment_bounds.hpp"
#include "wbt/random.hpp"
#include "wbt/stats.hpp"

namespace wbt {

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

struct SampleOptions {
  RecursionKind kind = RecursionKind::linear;
  std::optional<unsigned> depth;  // nullopt: exact sampling of a.s. finite trees
  std::uint64_t budget = kDefaultBudget;
  std::optional<MarkLaw> initial;  // R*_0 law; set for iterate-from batches
};

struct Replication {
  double value = 0.0;
  std::uint64_t nodes = 0;
  bool truncated = false;
};

// Reusable buffers for one worker.
struct TraversalScratch {
  struct Frame {
    std::uint64_t key;
    double q;
    double log_pi;
    double acc;
    std::size_t c_begin;
    unsigned n;
    unsigned next;
    unsigned level;
  };
  std::vector<Frame> frames;
  std::vector<double> weights;
  std::vector<std::uint64_t> z;  // Z_k of the current replication
};

// ---------------------------------------------------------------------------
// Folds. `horizon` gives the value of a node at the truncation depth,
// `finish` that of an internal or childless node from its folded children.

struct LinearFold {
  static constexpr bool tracks_path = false;
  double horizon(std::uint64_t, double q, double) const { return q; }
  static double combine(double acc, double c, double v) { return acc + c * v; }
  static double finish(double q, double acc, double) { return acc + q; }
};

// W_n with unit marks.
struct HomogeneousFold {
  static constexpr bool tracks_path = false;
  double horizon(std::uint64_t, double, double) const { return 1.0; }
  static double combine(double acc, double c, double v) { return acc + c * v; }
  static double finish(double, double acc, double) { return acc; }
};

// W_n with the model's marks.
struct GenerationFold {
  static constexpr bool tracks_path = false;
  double horizon(std::uint64_t, double q, double) const { return q; }
  static double combine(double acc, double c, double v) { return acc + c * v; }
  static double finish(double, double acc, double) { return acc; }
};

struct MaxFold {
  static constexpr bool tracks_path = false;
  double horizon(std::uint64_t, double q, double) const { return q; }
  static double combine(double acc, double c, double v) { return std::max(acc, c * v); }
  static double finish(double q, double acc, double) { return std::max(acc, q); }
};

struct MaxPlusFold {
  static constexpr bool tracks_path = false;
  double horizon(std::uint64_t, double q, double) const { return q; }
  static double combine(double acc, double c, double v) { return std::max(acc, c * v); }
  static double finish(double q, double acc, double) { return acc + q; }
};

// Replaces the horizon marks of `Base` by iid draws of R*_0, giving
// R*_n = R^(n-1) + W_n(R*_0) (linear) or R^(n-1) v V_n(R*_0) (max).
template <class Base>
struct InitialValueFold : Base {
  const MarkLaw* initial = nullptr;
  double horizon(std::uint64_t key, double, double) const {
    SplitMix64 eng(side_key(key, 0x0f));
    return sample_law(*initial, eng);
  }
};

/// Runs one replication of `fold` on the tree keyed by `key`.
template <class Fold>
Replication traverse(const VectorModel& m, const Fold& fold, std::optional<unsigned> depth,
                     std::uint64_t key, std::uint64_t budget, TraversalScratch& s) {
  using Frame = TraversalScratch::Frame;
  s.frames.clear();
  s.weights.clear();
  s.z.clear();
  std::uint64_t nodes = 0;

  // Opens a node. Returns true and sets `value` when the node is terminal;
  // otherwise pushes a frame.
  auto open = [&](std::uint64_t k, unsigned level, double log_pi, double& value) -> bool {
    ++nodes;
    if (level >= s.z.size()) s.z.resize(level + 1, 0);
    ++s.z[level];
    SplitMix64 eng(k);
    const double q = sample_law(m.mark, eng);
    if (depth && level == *depth) {
      value = fold.horizon(k, q, log_pi);
      return true;
    }
    const unsigned n = sample_count(m.count, eng);
    if (n == 0) {
      value = Fold::finish(q, 0.0, log_pi);
      return true;
    }
    const std::size_t begin = s.weights.size();
    for (unsigned j = 0; j < n; ++j) s.weights.push_back(m.c_scale * sample_law(m.weight, eng));
    s.frames.push_back(Frame{k, q, log_pi, 0.0, begin, n, 0, level});
    return false;
  };

  double value = 0.0;
  if (open(key, 0, 0.0, value)) return {value, nodes, false};
  while (true) {
    if (nodes > budget) return {0.0, nodes, true};
    Frame& f = s.frames.back();
    if (f.next < f.n) {
      const unsigned j = f.next++;
      const double c = s.weights[f.c_begin + j];
      double child_log = 0.0;
      if constexpr (Fold::tracks_path) child_log = f.log_pi + std::log(c);
      const std::uint64_t ck = child_key(f.key, j);
      const unsigned level = f.level + 1;
      if (open(ck, level, child_log, value)) {
        Frame& g = s.frames.back();
        g.acc = Fold::combine(g.acc, c, value);
      }
      continue;
    }
    value = Fold::finish(f.q, f.acc, f.log_pi);
    s.weights.resize(f.c_begin);
    s.frames.pop_back();
    if (s.frames.empty()) return {value, nodes, false};
    Frame& p = s.frames.back();
    p.acc = Fold::combine(p.acc, s.weights[p.c_begin + p.next - 1], value);
  }
}

namespace detail {

inline void validate(const VectorModel& m, const SampleOptions& opt) {
  if (opt.budget < 1) throw Error(ErrorKind::invalid_parameter, "budget must be >= 1");
  if (!opt.depth) {
    if (count_pmf(m.count, 0) <= 0.0)
      throw Error(ErrorKind::precondition, "exact sampling needs P(N = 0) > 0");
    if (opt.kind == RecursionKind::homogeneous || opt.kind == RecursionKind::generation)
      throw Error(ErrorKind::precondition, "W_n kinds need a finite depth");
  }
  if (opt.initial) {
    if (opt.kind != RecursionKind::linear && opt.kind != RecursionKind::max)
      throw Error(ErrorKind::unsupported, "iterate-from supports the linear and max kinds");
    if (!opt.depth || *opt.depth < 1)
      throw Error(ErrorKind::invalid_parameter, "iterate-from needs n >= 1 iterations");
  }
}

template <class Fold>
Replication with_initial(const VectorModel& m, const SampleOptions& opt, std::uint64_t key,
                         TraversalScratch& s) {
  if (opt.initial) {
    InitialValueFold<Fold> f;
    f.initial = &*opt.initial;
    return traverse(m, f, opt.depth, key, opt.budget, s);
  }
  return traverse(m, Fold{}, opt.depth, key, opt.budget, s);
}

}  // namespace detail

inline Replication sample_recursion(const VectorModel& m, const SampleOptions& opt,
                                    std::uint64_t key, TraversalScratch& s) {
  switch (opt.kind) {
    case RecursionKind::linear: return detail::with_initial<LinearFold>(m, opt, key, s);
    case RecursionKind::max: return detail::with_initial<MaxFold>(m, opt, key, s);
    case RecursionKind::max_plus: return traverse(m, MaxPlusFold{}, opt.depth, key, opt.budget, s);
    case RecursionKind::homogeneous: return traverse(m, HomogeneousFold{}, opt.depth, key, opt.budget, s);
    case RecursionKind::generation: return traverse(m, GenerationFold{}, opt.depth, key, opt.budget, s);
  }
  return {};
}

/// One replication with fresh scratch space.
inline Replication sample_recursion(const VectorModel& m, const SampleOptions& opt,
                                    std::uint64_t key) {
  detail::validate(m, opt);
  TraversalScratch s;
  return sample_recursion(m, opt, key, s);
}

// ---------------------------------------------------------------------------
// Batches

struct LevelStat {
  std::uint64_t sum = 0;
  unsigned __int128 sum_sq = 0;
};

struct SampleBatch {
  RecursionKind kind = RecursionKind::linear;
  std::optional<unsigned> depth;
  std::optional<MarkLaw> initial;
  nlohmann::json initial_spec;  // config form of `initial`, for reports
  std::vector<double> values;   // accepted replications, in replication order
  std::vector<std::uint64_t> node_counts;
  std::vector<LevelStat> levels;  // Z_k sums over accepted replications
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t truncated = 0;
  std::uint64_t budget = kDefaultBudget;
  std::uint64_t model_hash = 0;

  std::size_t accepted() const { return values.size(); }

  Estimate level_mean(std::size_t k) const {
    if (k >= levels.size() || values.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    const double mean = static_cast<double>(levels[k].sum) / n;
    const double ex2 = static_cast<double>(levels[k].sum_sq) / n;
    const double var = n > 1 ? std::max(0.0, (ex2 - mean * mean) * n / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
  }
};

inline std::string kind_label(const SampleBatch& b) {
  return b.initial ? std::string("iterate-from:") + to_string(b.kind) : to_string(b.kind);
}

/// Runs `reps` independent replications on `workers` threads. Replication i
/// uses the stream keyed by (seed, i), so the output is identical for every
/// worker count. Replications that exceed the node budget are dropped and
/// counted; if all of them do, the batch is an error.
inline SampleBatch run_batch(const VectorModel& m, const SampleOptions& opt, std::size_t reps,
                             std::uint64_t seed, unsigned workers = 1) {
  if (reps < 1) throw Error(ErrorKind::invalid_parameter, "reps must be >= 1");
  if (workers < 1) throw Error(ErrorKind::invalid_parameter, "workers must be >= 1");
  detail::validate(m, opt);

  std::vector<Replication> out(reps);
  std::vector<std::vector<LevelStat>> levels(workers);
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 256;

  auto work = [&](unsigned w) {
    TraversalScratch scratch;
    auto& lv = levels[w];
    while (true) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= reps) break;
      const std::size_t end = std::min(reps, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        out[i] = sample_recursion(m, opt, replication_key(seed, i), scratch);
        if (out[i].truncated) continue;
        if (lv.size() < scratch.z.size()) lv.resize(scratch.z.size());
        for (std::size_t k = 0; k < scratch.z.size(); ++k) {
          const std::uint64_t z = scratch.z[k];
          lv[k].sum += z;
          lv[k].sum_sq += static_cast<unsigned __int128>(z) * z;
        }
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  SampleBatch b;
  b.kind = opt.kind;
  b.depth = opt.depth;
  b.initial = opt.initial;
  b.seed = seed;
  b.reps = reps;
  b.budget = opt.budget;
  b.model_hash = model_hash(m);
  b.values.reserve(reps);
  b.node_counts.reserve(reps);
  for (const auto& r : out) {
    if (r.truncated) {
      ++b.truncated;
      continue;
    }
    b.values.push_back(r.value);
    b.node_counts.push_back(r.nodes);
  }
  for (const auto& lv : levels) {
    if (b.levels.size() < lv.size()) b.levels.resize(lv.size());
    for (std::size_t k = 0; k < lv.size(); ++k) {
      b.levels[k].sum += lv[k].sum;
      b.levels[k].sum_sq += lv[k].sum_sq;
    }
  }
  if (b.values.empty())
    throw Error(ErrorKind::budget_exhausted,
                "all " + std::to_string(reps) + " replications exceeded the node budget");
  return b;
}

/// Samples R*_n, the n-th iterate of the recursion started from R*_0 ~ `initial`.
inline SampleBatch iterate_from(const VectorModel& m, RecursionKind kind, const MarkLaw& initial,
                                unsigned n, std::size_t reps, std::uint64_t seed,
                                unsigned workers = 1, std::uint64_t budget = kDefaultBudget) {
  SampleOptions opt;
  opt.kind = kind;
  opt.depth = n;
  opt.budget = budget;
  opt.initial = initial;
  return run_batch(m, opt, reps, seed, workers);
}

}  // namespace wbt
