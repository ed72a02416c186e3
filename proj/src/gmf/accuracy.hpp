#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gmf/ctmc.hpp"
#include "gmf/field.hpp"
#include "gmf/graphon.hpp"
#include "json.hpp"

namespace gmf {

/// Exact L2 distance sqrt(sum_s \int (a_s - b_s)^2 du) of two step fields,
/// integrated on the union of both partitions. Resolutions may differ.
double l2_distance_fields(const OccupancyField& a, const OccupancyField& b);

struct AccuracyReport {
  std::size_t n = 0;
  std::uint64_t r = 0;
  std::size_t gamma = 0;
  std::vector<double> t_grid;
  std::vector<double> error;         // ||ensemble mean - ODE|| per time
  std::vector<double> mc_halfwidth;  // 3 sigma Monte Carlo noise scale per time
  double distance_term = 0.0;        // ||G^N - G|| (L2 operator norm)
  std::optional<double> psi_term;    // psi_{2/N,G}(N), stochastic samples only
};

/// Compares the ensemble mean with the ODE fields on the shared time grid.
/// mc_halfwidth = 3 sqrt(sum_{k,s} p(1-p) / R) / sqrt(N) with p the
/// empirical occupancy. psi_term is filled when `stochastic` is set and the
/// bound is defined at delta = 2/N.
AccuracyReport error_vs_bound(const EnsembleStats& stats,
                              std::span<const OccupancyField> ode, const Graphon& g,
                              const WeightedGraph& graph, bool stochastic);

double mc_halfwidth(const EnsembleStats& stats, std::size_t t);

struct ScalingFit {
  std::vector<double> n_values;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares fit of log(error) = intercept + slope log(N).
ScalingFit convergence_slope(std::span<const std::pair<double, double>> points);

nlohmann::json to_json(const AccuracyReport& report);
nlohmann::json to_json(const ScalingFit& fit);
// Columns t,error,mc_halfwidth,distance_term,psi_term (psi_term empty if absent).
void write_csv(const std::filesystem::path& path, const AccuracyReport& report);
// Columns n,error
void write_csv(const std::filesystem::path& path, const ScalingFit& fit);

}  // namespace gmf
