#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace wbt {

// Finalizer of the splitmix64 generator; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ mix64(b + 0x9e3779b97f4a7c15ULL));
}

/// Small keyed generator used for per-node and per-replication streams.
///
/// Every node of a sampled tree owns one of these, seeded from its
/// Ulam-Harris label, so the realised tree is a pure function of
/// (seed, replication, label) and does not depend on traversal order,
/// truncation depth or worker count. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t key = 0) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  constexpr double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Key of replication `index` under a batch seed.
constexpr std::uint64_t replication_key(std::uint64_t seed, std::uint64_t index) noexcept {
  return combine_keys(mix64(seed ^ 0x5eedULL), index);
}

/// Key of child `j` (0-based) of the node with key `parent`.
constexpr std::uint64_t child_key(std::uint64_t parent, std::uint64_t j) noexcept {
  return combine_keys(parent, j + 1);
}

// Independent sub-stream of a node (e.g. the initial-value draws of R*_n).
constexpr std::uint64_t side_key(std::uint64_t key, std::uint64_t tag) noexcept {
  return combine_keys(key ^ 0xa5a5a5a5a5a5a5a5ULL, tag);
}

// FNV-1a, used for model fingerprints in batch headers.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace wbt
