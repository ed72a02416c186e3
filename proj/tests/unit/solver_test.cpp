#include <gtest/gtest.h>

#include <cmath>

#include "gmf/accuracy.hpp"
#include "gmf/dynamics.hpp"
#include "gmf/error.hpp"
#include "gmf/solver.hpp"

namespace gmf {
namespace {

OccupancyField all_in(std::size_t gamma, std::size_t ns, std::size_t s) {
  std::vector<double> d(ns, 0.0);
  d[s] = 1.0;
  return OccupancyField::uniform(gamma, d);
}

TEST(Solver, TwoStateClosedForm) {
  const RateModel rm = RateModel::two_state(1.0, 1.0);
  const SolverConfig cfg{.gamma = 10, .dt = 1e-3, .t_end = 2.0};
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const auto out = solve(all_in(10, 2, 0), Graphon::constant(1.0), rm, cfg, times);
  ASSERT_EQ(out.size(), times.size());
  for (std::size_t t = 0; t < times.size(); ++t) {
    const double exact = 0.5 + 0.5 * std::exp(-2.0 * times[t]);
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_NEAR(out[t](i, 0), exact, 1e-6);
      EXPECT_NEAR(out[t](i, 1), 1.0 - exact, 1e-6);
    }
  }
}

TEST(Solver, ZeroRatesAreExact) {
  const RateModel rm = RateModel::sis(0.0, 0.0);
  const double d[] = {0.3, 0.7};
  const auto x0 = OccupancyField::uniform(6, d);
  const std::vector<double> times{0.0, 0.25, 1.0};
  const auto out = solve(x0, Graphon::triangular(), rm, {.gamma = 6, .dt = 0.01, .t_end = 1.0}, times);
  for (const auto& f : out) EXPECT_EQ(f.values(), x0.values());
}

TEST(Solver, FourthOrderConvergence) {
  const RateModel rm = RateModel::sis(3.0, 1.0);
  const Graphon g = Graphon::triangular();
  const double d[] = {0.9, 0.1};
  const auto x0 = OccupancyField::uniform(8, d);
  const std::vector<double> times{1.0};
  auto run = [&](double dt) { return solve(x0, g, rm, {.gamma = 8, .dt = dt, .t_end = 1.0}, times)[0]; };
  const auto ref = run(0.001);
  const double e1 = l2_distance_fields(run(0.008), ref);
  const double e2 = l2_distance_fields(run(0.004), ref);
  EXPECT_GT(e1, 0.0);
  EXPECT_GE(e1 / e2, 12.0);
}

TEST(Solver, IndicatorEmbedding) {
  const RateModel rm = RateModel::two_state(0.0, 0.0);
  const std::vector<StateIndex> states{0, 1};
  const std::vector<double> times{0.0, 1.0};
  const auto out = solve_from_indicator(states, Graphon::constant(1.0), rm,
                                        {.gamma = 4, .dt = 0.01, .t_end = 1.0}, times);
  for (const auto& f : out) {
    EXPECT_EQ(f.values(), (std::vector<double>{1, 0, 1, 0, 0, 1, 0, 1}));
  }
  const std::vector<StateIndex> three{0, 1, 0};
  EXPECT_THROW(solve_from_indicator(three, Graphon::constant(1.0), rm,
                                    {.gamma = 4, .dt = 0.01, .t_end = 1.0}, times),
               InvalidArgument);
}

TEST(Solver, Semigroup) {
  const RateModel rm = RateModel::sis(2.0, 0.5);
  const Graphon g = Graphon::triangular();
  const double d[] = {0.8, 0.2};
  const auto x0 = OccupancyField::uniform(16, d);
  const std::vector<double> t1{1.0}, t2{2.0}, t_half{0.7};
  const SolverConfig cfg{.gamma = 16, .dt = 1e-3, .t_end = 2.0};
  const auto direct = solve(x0, g, rm, cfg, t2)[0];
  const auto mid = solve(x0, g, rm, {.gamma = 16, .dt = 1e-3, .t_end = 1.0}, t1)[0];
  const auto composed = solve(mid, g, rm, {.gamma = 16, .dt = 1e-3, .t_end = 1.0}, t1)[0];
  EXPECT_LT(l2_distance_fields(direct, composed), 1e-8);
}

TEST(Solver, SimplexPreserved) {
  const RateModel rm = RateModel::sis(5.0, 0.2);
  OccupancyField x0(32, 2);
  for (std::size_t i = 0; i < 32; ++i) {
    x0(i, 1) = (i % 5 == 0) ? 1.0 : 0.0;
    x0(i, 0) = 1.0 - x0(i, 1);
  }
  std::vector<double> times;
  for (int i = 0; i <= 50; ++i) times.push_back(0.1 * i);
  const auto out = solve(x0, Graphon::triangular(), rm, {.gamma = 32, .dt = 0, .t_end = 5.0}, times);
  for (const auto& f : out) {
    EXPECT_LT(f.max_row_sum_error(), 1e-12);
    EXPECT_GE(f.min_value(), -1e-12);
  }
}

TEST(Solver, GronwallStability) {
  const RateModel rm = RateModel::sis(2.0, 1.0);
  const Graphon g = Graphon::triangular();
  const auto drift = PairwiseDrift::from_graphon(rm, g, 16);
  const double a[] = {0.7, 0.3}, b[] = {0.65, 0.35};
  const auto xa = OccupancyField::uniform(16, a), xb = OccupancyField::uniform(16, b);
  const std::vector<double> times{0.5, 1.0};
  const SolverConfig cfg{.gamma = 16, .dt = 1e-3, .t_end = 1.0};
  const auto ya = solve(xa, drift, cfg, times), yb = solve(xb, drift, cfg, times);
  const double d0 = l2_distance_fields(xa, xb);
  for (std::size_t t = 0; t < times.size(); ++t) {
    EXPECT_LE(l2_distance_fields(ya[t], yb[t]),
              d0 * std::exp(drift.lipschitz_bound() * times[t]));
  }
}

TEST(Solver, StepGuard) {
  const RateModel rm = RateModel::two_state(1.0, 1.0);
  const auto drift = PairwiseDrift::from_graphon(rm, Graphon::constant(1.0), 4);
  const double lip = drift.lipschitz_bound();
  EXPECT_DOUBLE_EQ(resolve_step({.gamma = 4, .dt = 0.0, .t_end = 1.0}, lip),
                   std::min(1e-2, 0.25 / lip));
  EXPECT_THROW(resolve_step({.gamma = 4, .dt = 0.6 / lip, .t_end = 1.0}, lip), InvalidArgument);
  EXPECT_THROW(solve(all_in(4, 2, 0), drift, {.gamma = 4, .dt = 1.0, .t_end = 1.0},
                     std::vector<double>{1.0}),
               InvalidArgument);
}

TEST(Solver, RejectsBadInputs) {
  const RateModel rm = RateModel::two_state(1.0, 1.0);
  const std::vector<double> descending{1.0, 0.5};
  EXPECT_THROW(solve(all_in(4, 2, 0), Graphon::constant(1.0), rm,
                     {.gamma = 4, .dt = 0.01, .t_end = 1.0}, descending),
               InvalidArgument);
  const std::vector<double> late{2.0};
  EXPECT_THROW(solve(all_in(4, 2, 0), Graphon::constant(1.0), rm,
                     {.gamma = 4, .dt = 0.01, .t_end = 1.0}, late),
               InvalidArgument);
  OccupancyField bad(4, 2);
  EXPECT_THROW(solve(bad, Graphon::constant(1.0), rm, {.gamma = 4, .dt = 0.01, .t_end = 1.0},
                     std::vector<double>{1.0}),
               InvariantViolation);
}

}  // namespace
}  // namespace gmf
