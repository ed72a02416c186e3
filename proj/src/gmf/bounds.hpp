#pragma once

#include <cstddef>

#include "gmf/graphon.hpp"

namespace gmf {

// Inputs of the high-probability distance bound for stochastic samples.
struct DistanceBoundParams {
  std::size_t n = 1;
  double delta = 0.0;   // failure probability, must be < 1/e
  double l_g = 0.0;     // Lipschitz constant of the graphon
  std::size_t k_g = 1;  // number of partition blocks
};

/// psi = sqrt(4 log(2N/delta) / N) + 2 sqrt((L^2 - K^2)/N^2 + K/N).
/// Throws DomainError when delta >= 1/e or the second radicand is negative.
double psi_bound(const DistanceBoundParams& p);

struct LargeEnoughReport {
  // (a) 2/N < smallest block width
  double width_lhs = 0.0, width_rhs = 0.0;
  bool width_ok = false;
  // (b) log(2N/delta)/N + (2K + 3L)/N < sup_u \int G(u,v) dv
  double degree_lhs = 0.0, degree_rhs = 0.0;
  bool degree_ok = false;
  // (c) N exp(-N/5) < delta
  double tail_lhs = 0.0, tail_rhs = 0.0;
  bool tail_ok = false;

  bool large_enough = false;
};

/// Evaluates the three "large enough N" conditions. The degree integral is a
/// midpoint rule with `quadrature` nodes in both u and v; the supremum over
/// u is taken over the midpoint nodes.
LargeEnoughReport large_enough_check(const Graphon& g, std::size_t n,
                                     double delta,
                                     std::size_t quadrature = 4096);

/// (2 L_B + 16 C_B^2 K) / N - 16 C_B^2 K^2 / N^2: the L2 discretization error
/// bound of a bounded piecewise Lipschitz kernel with K jumps.
double discretization_error_bound(double l_b, double c_b, std::size_t k,
                                  std::size_t n);

}  // namespace gmf
