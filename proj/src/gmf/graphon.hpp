#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace gmf {

class WeightedGraph;

/// A kernel on (0,1]^2 together with the piecewise-Lipschitz metadata the
/// error bounds need: the partition 0 = a_0 < a_1 < ... < a_K = 1 of (0,1]
/// into blocks (a_{k-1}, a_k], a Lipschitz constant valid inside every block
/// rectangle, and an upper bound on the values.
///
/// Graphons are immutable values; copies share the kernel callable.
class Graphon {
 public:
  using Kernel = std::function<double(double u, double v)>;

  Graphon(Kernel kernel, std::vector<double> breakpoints, double lipschitz,
          double bound, bool symmetric, nlohmann::json spec = nullptr);

  double operator()(double u, double v) const { return kernel_(u, v); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  // K_G, the number of blocks of the partition.
  std::size_t block_count() const { return breakpoints_.size() - 1; }
  double min_block_width() const;
  double lipschitz() const { return lipschitz_; }
  double bound() const { return bound_; }
  bool symmetric() const { return symmetric_; }

  // JSON document this graphon was built from (null for ad-hoc kernels).
  const nlohmann::json& spec() const { return spec_; }

  // Degree integral d(u) = \int_0^1 G(u, v) dv by midpoint quadrature.
  double degree(double u, std::size_t quadrature = 4096) const;

  static Graphon constant(double value);
  // G(u,v) = (1 - |u - v|) / 2.
  static Graphon triangular();
  // G(u,v) = p(v) / \int_0^1 p with popularity p(v) = a - b v.
  static Graphon bike_popularity(double a = 1.0, double b = 0.5);
  // Constant on every rectangle A_i x A_j of the partition.
  static Graphon blockwise(std::vector<double> breakpoints,
                           std::vector<std::vector<double>> values);
  // Step graphon of a finite graph: value entries[k][l] on
  // ((k-1)/n, k/n] x ((l-1)/n, l/n].
  static Graphon step(const WeightedGraph& graph);

  /// {"kind": "constant"|"triangular_fig1a"|"bike_popularity"|"blockwise",
  ///  parameters..., "breakpoints": [...], "lipschitz": L}
  /// The optional "breakpoints"/"lipschitz" entries override the metadata of
  /// the named kind. Throws ConfigError on malformed documents.
  static Graphon from_json(const nlohmann::json& doc);

 private:
  Kernel kernel_;
  std::vector<double> breakpoints_;
  double lipschitz_;
  double bound_;
  bool symmetric_;
  nlohmann::json spec_;
};

/// N x N interaction matrix, also viewable as a step graphon.
///
/// Entries are nonnegative and finite; sampled graphs are binary. Entries of
/// deterministic discretizations may exceed 1 when the graphon does.
class WeightedGraph {
 public:
  WeightedGraph(std::size_t n, std::vector<double> entries);

  std::size_t n() const { return n_; }
  double operator()(std::size_t k, std::size_t l) const {
    return entries_[k * n_ + l];
  }
  std::span<const double> row(std::size_t k) const {
    return {entries_.data() + k * n_, n_};
  }
  std::span<const double> entries() const { return entries_; }
  bool binary() const { return binary_; }
  bool symmetric() const { return symmetric_; }
  double max_entry() const;

  // Value of the step embedding at (u, v) in (0,1]^2.
  double step_value(double u, double v) const;

  /// Binary layout: "GMFGRAPH", uint32 little-endian N, then N^2 IEEE-754
  /// doubles (little-endian), row-major.
  void save(const std::filesystem::path& path) const;
  static WeightedGraph load(const std::filesystem::path& path);
  std::vector<std::uint8_t> serialize() const;
  static WeightedGraph deserialize(std::span<const std::uint8_t> bytes);

  // CSV with header "k,l,value" (1-based indices), one row per entry.
  void save_csv(const std::filesystem::path& path) const;

  bool operator==(const WeightedGraph& other) const {
    return n_ == other.n_ && entries_ == other.entries_;
  }

 private:
  std::size_t n_;
  std::vector<double> entries_;
  bool binary_;
  bool symmetric_;
};

// 1-based index of the cell ((k-1)/n, k/n] containing u in (0,1].
std::size_t cell_of(double u, std::size_t n);

/// Deterministic sampling: entries[k][l] = g(k/n, l/n), k,l = 1..n.
WeightedGraph discretize_deterministic(const Graphon& g, std::size_t n);

/// Stochastic sampling: independent Bernoulli(g(k/n, l/n)) edges for k < l,
/// mirrored; the diagonal is drawn as Bernoulli(g(k/n, k/n)). Requires a
/// symmetric graphon with values in [0, 1].
WeightedGraph sample_stochastic(const Graphon& g, std::size_t n,
                                std::uint64_t seed);

}  // namespace gmf
