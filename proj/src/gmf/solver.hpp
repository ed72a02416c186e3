#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "gmf/dynamics.hpp"
#include "gmf/field.hpp"
#include "gmf/graphon.hpp"

namespace gmf {

/// Fixed-step classical RK4 on the step-discretized drift.
/// dt = 0 selects min(1e-2, 0.25 / L_F).
struct SolverConfig {
  std::size_t gamma = 100;
  double dt = 0.0;
  double t_end = 1.0;
};

// Step actually used for a drift with Lipschitz bound `lipschitz`. Throws
// InvalidArgument when the requested step exceeds 0.5 / lipschitz.
double resolve_step(const SolverConfig& cfg, double lipschitz);

/// Integrates x' = F(x) from x0 and returns the state at every out_time
/// (ascending, within [0, t_end]). Steps are shortened to land on each
/// output time exactly. A row leaving the simplex by more than 1e-6 raises
/// InvariantViolation naming the cell; output rows within 1e-9 of the
/// simplex are rescaled to sum to one.
std::vector<OccupancyField> solve(const OccupancyField& x0, const FieldDrift& drift,
                                  const SolverConfig& cfg,
                                  std::span<const double> out_times);

// Graphon mean field ODE at resolution cfg.gamma (x0 must match it).
std::vector<OccupancyField> solve(const OccupancyField& x0, const Graphon& g,
                                  const RateModel& rm, const SolverConfig& cfg,
                                  std::span<const double> out_times);

/// Starts from the indicator field of a particle configuration embedded at
/// resolution cfg.gamma, which must be a multiple of states.size().
std::vector<OccupancyField> solve_from_indicator(std::span<const StateIndex> states,
                                                 const Graphon& g, const RateModel& rm,
                                                 const SolverConfig& cfg,
                                                 std::span<const double> out_times);

std::vector<OccupancyField> solve_from_indicator(std::span<const StateIndex> states,
                                                 const FieldDrift& drift,
                                                 const SolverConfig& cfg,
                                                 std::span<const double> out_times);

// Columns t,i,u,s,value with 1-based cell index i and u = i / gamma.
void write_ode_csv(const std::filesystem::path& path, std::span<const double> times,
                   std::span<const OccupancyField> fields);

}  // namespace gmf
