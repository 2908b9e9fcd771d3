#pragma once

// Batch CSV files and summary JSON.
//
// CSV layout: a metadata comment line, a column header, then one value per
// row in shortest round-trip decimal, so reading a file back reproduces the
// batch bit for bit.

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbt/engine.hpp"
#include "wbt/error.hpp"
#include "wbt/stats.hpp"
#include "wbt/tails.hpp"

namespace wbt {

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline std::string depth_label(const std::optional<unsigned>& depth) {
  return depth ? std::to_string(*depth) : "exact";
}

inline std::string batch_header(const SampleBatch& b) {
  return "# model_hash=" + hash_hex(b.model_hash) + " kind=" + kind_label(b) + " depth=" +
         depth_label(b.depth) + " seed=" + std::to_string(b.seed) + " reps=" + std::to_string(b.reps) +
         " truncated=" + std::to_string(b.truncated);
}

inline void write_batch_csv(const std::string& path, const SampleBatch& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << batch_header(b) << "\nvalue\n";
  for (double v : b.values) out << format_double(v) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

struct LoadedBatch {
  std::map<std::string, std::string> meta;
  std::vector<double> values;
};

inline LoadedBatch read_batch_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open batch '" + path + "'");
  LoadedBatch b;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string kv;
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq != std::string::npos) b.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      continue;
    }
    if (line == "value") continue;
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size() || !(v >= 0.0))
      throw Error(ErrorKind::io, path + ":" + std::to_string(lineno) + ": malformed value '" + line + "'");
    b.values.push_back(v);
  }
  if (b.values.empty()) throw Error(ErrorKind::io, "batch '" + path + "' holds no values");
  return b;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}};
}

/// Summary of a batch: moments, quantiles and generation-size statistics.
inline nlohmann::json batch_summary(const SampleBatch& b) {
  nlohmann::json j;
  j["kind"] = kind_label(b);
  j["depth"] = depth_label(b.depth);
  j["seed"] = b.seed;
  j["reps"] = b.reps;
  j["accepted"] = b.accepted();
  j["truncated_replications"] = b.truncated;
  j["budget"] = b.budget;
  j["model_hash"] = hash_hex(b.model_hash);
  j["mean"] = estimate_json(grouped_jackknife_mean(b.values));
  const auto sorted = sorted_copy(b.values);
  nlohmann::json q = nlohmann::json::object();
  for (double p : {0.5, 0.9, 0.99, 0.999}) q[format_double(p)] = sorted_quantile(sorted, p);
  q["max"] = sorted.back();
  j["quantiles"] = q;

  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t k = 0; k < b.levels.size(); ++k) {
    const auto e = b.level_mean(k);
    levels.push_back({{"k", k}, {"mean", e.value}, {"std_error", e.std_error}});
  }
  RunningMoments nodes;
  std::uint64_t max_nodes = 0;
  for (auto n : b.node_counts) {
    nodes.add(static_cast<double>(n));
    max_nodes = std::max(max_nodes, n);
  }
  j["z_counts"] = {{"levels", levels},
                   {"total_nodes", {{"mean", nodes.mean()}, {"std_error", nodes.std_error()}, {"max", max_nodes}}}};
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

}  // namespace wbt
