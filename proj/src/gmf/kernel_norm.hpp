#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmf/error.hpp"
#include "gmf/graphon.hpp"

namespace gmf {

struct OpNormOptions {
  double rel_tol = 1e-10;
  std::size_t max_iterations = 10000;
};

struct OpNormResult {
  double norm = 0.0;        // L2 operator norm of the step kernel
  std::size_t grid = 0;     // resolution m the kernel was represented on
  std::size_t iterations = 0;
  double residual = 0.0;    // ||M^T M x - lambda x|| / lambda at exit
};

// The iteration ran out of products. Carries the last unit iterate and
// its residual so callers can decide whether the estimate is usable.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, std::vector<double> last_iterate,
               double estimate, double residual)
      : Error(ErrorCode::kNotConverged, what),
        last_iterate_(std::move(last_iterate)),
        estimate_(estimate),
        residual_(residual) {}
  const std::vector<double>& last_iterate() const { return last_iterate_; }
  double estimate() const { return estimate_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> last_iterate_;
  double estimate_;
  double residual_;
};

/// Exact L2 operator norm of the step kernel whose value on cell
/// ((i-1)/m, i/m] x ((j-1)/m, j/m] is grid[i*m + j]: sigma_max(M) / m.
/// sigma_max^2 is the top eigenvalue of M^T M, found by Lanczos iteration
/// with full reorthogonalization (restarted every 120 steps). It stops once
/// the relative residual of the Ritz pair is below rel_tol or the Ritz value
/// changed by less than rel_tol (relative) in two consecutive steps.
/// max_iterations bounds the number of products with M^T M.
OpNormResult step_kernel_opnorm(std::span<const double> grid, std::size_t m,
                                const OpNormOptions& opts = {});

// Operator norm of a graph viewed as a step graphon (grid = its own n).
OpNormResult l2_opnorm(const WeightedGraph& graph,
                       const OpNormOptions& opts = {});

// Smallest multiple of n that is >= 1024.
std::size_t default_distance_grid(std::size_t n);

/// ||g - step(h)|| in the L2 operator norm, with the difference kernel
/// sampled at the right endpoints (i/m, j/m) of an m-grid. m must be a
/// positive multiple of h.n() so the step embedding is represented exactly;
/// m = 0 selects default_distance_grid(h.n()).
OpNormResult graph_graphon_distance(const Graphon& g, const WeightedGraph& h,
                                    std::size_t m = 0,
                                    const OpNormOptions& opts = {});

}  // namespace gmf
