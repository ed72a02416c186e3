#include "gmf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmf/error.hpp"

namespace gmf {
namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < std::exp(-1.0))) {
    throw DomainError("delta must lie in (0, 1/e), got " + std::to_string(delta));
  }
}

}  // namespace

double psi_bound(const DistanceBoundParams& p) {
  if (p.n == 0) throw DomainError("psi bound needs N >= 1");
  check_delta(p.delta);
  const double n = static_cast<double>(p.n);
  const double k = static_cast<double>(p.k_g);
  const double sampling = std::sqrt(4.0 * std::log(2.0 * n / p.delta) / n);
  const double radicand = (p.l_g * p.l_g - k * k) / (n * n) + k / n;
  if (radicand < 0.0) {
    throw DomainError("psi bound radicand (L_G^2 - K_G^2)/N^2 + K_G/N = " +
                      std::to_string(radicand) + " is negative");
  }
  return sampling + 2.0 * std::sqrt(radicand);
}

LargeEnoughReport large_enough_check(const Graphon& g, std::size_t n,
                                     double delta, std::size_t quadrature) {
  check_delta(delta);
  if (n == 0) throw InvalidArgument("large-enough check needs N >= 1");
  if (quadrature == 0) throw InvalidArgument("quadrature resolution must be >= 1");
  const double nd = static_cast<double>(n);
  LargeEnoughReport r;

  r.width_lhs = 2.0 / nd;
  r.width_rhs = g.min_block_width();
  r.width_ok = r.width_lhs < r.width_rhs;

  r.degree_lhs = std::log(2.0 * nd / delta) / nd +
                 (2.0 * static_cast<double>(g.block_count()) + 3.0 * g.lipschitz()) / nd;
  double sup = 0.0;
  for (std::size_t i = 0; i < quadrature; ++i) {
    sup = std::max(sup, g.degree((static_cast<double>(i) + 0.5) / quadrature, quadrature));
  }
  r.degree_rhs = sup;
  r.degree_ok = r.degree_lhs < r.degree_rhs;

  r.tail_lhs = std::exp(std::log(nd) - nd / 5.0);
  r.tail_rhs = delta;
  r.tail_ok = r.tail_lhs < r.tail_rhs;

  r.large_enough = r.width_ok && r.degree_ok && r.tail_ok;
  return r;
}

double discretization_error_bound(double l_b, double c_b, std::size_t k,
                                  std::size_t n) {
  if (n == 0) throw DomainError("discretization bound needs N >= 1");
  if (!(l_b >= 0.0) || !(c_b >= 0.0)) {
    throw DomainError("discretization bound needs L_B >= 0 and C_B >= 0");
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double c2 = 16.0 * c_b * c_b;
  const double value = (2.0 * l_b + c2 * kd) / nd - c2 * kd * kd / (nd * nd);
  if (value < 0.0) {
    throw DomainError("discretization bound is negative (K=" + std::to_string(k) +
                      " exceeds N=" + std::to_string(n) + ")");
  }
  return value;
}

}  // namespace gmf
