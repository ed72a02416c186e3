#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gmf::rng {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the independent stream number `index` under `master`:
///   splitmix64(master ^ splitmix64(index ^ 0x6A09E667F3BCC909)).
/// Streams are reproducible individually, so trajectories can be run in any
/// order or on any thread.
inline constexpr std::uint64_t stream_seed(std::uint64_t master,
                                           std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index ^ 0x6A09E667F3BCC909ULL));
}

inline Engine stream(std::uint64_t master, std::uint64_t index) {
  return Engine(stream_seed(master, index));
}

// Stream index reserved for graph sampling so graph draws never collide with
// trajectory streams 0, 1, 2, ...
inline constexpr std::uint64_t kGraphStream = ~std::uint64_t{0};

// Uniform on [0, 1) from the top 53 bits. Written out instead of
// std::uniform_real_distribution so results do not depend on the standard
// library implementation.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Exponential holding time with the given rate (> 0).
inline double exponential(Engine& eng, double rate) {
  return -std::log1p(-uniform01(eng)) / rate;
}

inline bool bernoulli(Engine& eng, double p) { return uniform01(eng) < p; }

}  // namespace gmf::rng
