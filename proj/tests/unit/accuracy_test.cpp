#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmf/accuracy.hpp"
#include "gmf/bounds.hpp"
#include "gmf/ctmc.hpp"
#include "gmf/error.hpp"
#include "gmf/solver.hpp"

namespace gmf {
namespace {

TEST(L2Distance, OrthogonalConstants) {
  const double a[] = {1.0, 0.0}, b[] = {0.0, 1.0};
  EXPECT_NEAR(l2_distance_fields(OccupancyField::uniform(3, a), OccupancyField::uniform(5, b)),
              std::sqrt(2.0), 1e-15);
}

TEST(L2Distance, RefinementIsZero) {
  OccupancyField coarse(2, 2, {0.3, 0.7, 0.9, 0.1});
  OccupancyField fine(4, 2, {0.3, 0.7, 0.3, 0.7, 0.9, 0.1, 0.9, 0.1});
  EXPECT_EQ(l2_distance_fields(coarse, fine), 0.0);
  EXPECT_EQ(l2_distance_fields(coarse, coarse), 0.0);
}

TEST(L2Distance, MetricProperties) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto rnd = [&](std::size_t res) {
    OccupancyField f(res, 3);
    for (double& v : f.values()) v = unif(eng);
    return f;
  };
  for (int rep = 0; rep < 30; ++rep) {
    const auto a = rnd(3), b = rnd(7), c = rnd(10);
    const double ab = l2_distance_fields(a, b);
    EXPECT_NEAR(ab, l2_distance_fields(b, a), 1e-14);
    EXPECT_LE(l2_distance_fields(a, c), ab + l2_distance_fields(b, c) + 1e-14);
    // Brute force on the common refinement 21 = lcm(3, 7).
    double sum = 0.0;
    for (std::size_t i = 0; i < 21; ++i)
      for (std::size_t s = 0; s < 3; ++s) {
        const double d = a(i / 7, s) - b(i / 3, s);
        sum += d * d / 21.0;
      }
    EXPECT_NEAR(ab, std::sqrt(sum), 1e-13);
  }
}

TEST(L2Distance, RejectsStateMismatch) {
  EXPECT_THROW(l2_distance_fields(OccupancyField(2, 2), OccupancyField(2, 3)), InvalidArgument);
}

TEST(Slope, PowerLaws) {
  std::vector<std::pair<double, double>> pts;
  for (double n : {10.0, 20.0, 40.0}) pts.emplace_back(n, 3.0 / n);
  EXPECT_NEAR(convergence_slope(pts).slope, -1.0, 1e-12);

  pts.clear();
  for (double n : {50.0, 100.0, 200.0, 400.0}) pts.emplace_back(n, 0.7 * std::sqrt(std::log(n) / n));
  // Oracle: ordinary least squares on the log-log points, written out.
  double mx = 0, my = 0;
  for (auto [n, e] : pts) mx += std::log(n) / 4, my += std::log(e) / 4;
  double sxy = 0, sxx = 0;
  for (auto [n, e] : pts) {
    sxy += (std::log(n) - mx) * (std::log(e) - my);
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
  }
  const auto fit = convergence_slope(pts);
  EXPECT_NEAR(fit.slope, sxy / sxx, 1e-12);
  EXPECT_NEAR(fit.slope, -0.40, 0.02);

  pts.clear();
  for (double n : {10.0, 20.0, 40.0}) pts.emplace_back(n, 0.1);
  EXPECT_NEAR(convergence_slope(pts).slope, 0.0, 1e-12);
}

TEST(Slope, RejectsBadInput) {
  std::vector<std::pair<double, double>> two{{10, 0.1}, {20, 0.05}};
  EXPECT_THROW(convergence_slope(two), InvalidArgument);
  std::vector<std::pair<double, double>> zero{{10, 0.1}, {20, 0.0}, {40, 0.01}};
  EXPECT_THROW(convergence_slope(zero), InvalidArgument);
}

TEST(ErrorVsBound, ExactMatchGivesZero) {
  const auto graph = discretize_deterministic(Graphon::constant(1.0), 4);
  const PairwiseKernel kernel(RateModel::sis(1.0, 1.0), graph);
  const std::vector<StateIndex> init{0, 1, 0, 1};
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const auto stats = ensemble_mean(10, init, kernel, grid, 3);
  const auto ode = stats.mean_fields();
  const auto rep = error_vs_bound(stats, ode, Graphon::constant(1.0), graph, false);
  ASSERT_EQ(rep.error.size(), 3u);
  for (double e : rep.error) EXPECT_EQ(e, 0.0);
  EXPECT_NEAR(rep.distance_term, 0.0, 1e-14);
  EXPECT_FALSE(rep.psi_term.has_value());
}

TEST(ErrorVsBound, ZeroRateModel) {
  const auto graph = discretize_deterministic(Graphon::constant(1.0), 5);
  const RateModel rm = RateModel::two_state(0.0, 0.0);
  const PairwiseKernel kernel(rm, graph);
  const std::vector<StateIndex> init{0, 1, 0, 1, 1};
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto stats = ensemble_mean(20, init, kernel, grid, 3);
  const auto ode = solve_from_indicator(init, Graphon::constant(1.0), rm,
                                        {.gamma = 5, .dt = 0.01, .t_end = 1.0}, grid);
  const auto rep = error_vs_bound(stats, ode, Graphon::constant(1.0), graph, false);
  EXPECT_EQ(rep.error[0], 0.0);
  for (std::size_t t = 0; t < grid.size(); ++t) EXPECT_LE(rep.error[t], rep.mc_halfwidth[t]);
}

TEST(ErrorVsBound, TwoStateWithinNoise) {
  const std::size_t n = 50;
  const auto graph = discretize_deterministic(Graphon::constant(1.0), n);
  const RateModel rm = RateModel::two_state(1.0, 1.0);
  const PairwiseKernel kernel(rm, graph);
  const std::vector<StateIndex> init(n, 0);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto stats = ensemble_mean(20000, init, kernel, grid, 8);
  const auto ode = solve_from_indicator(init, Graphon::constant(1.0), rm,
                                        {.gamma = 100, .dt = 1e-3, .t_end = 1.0}, grid);
  const auto rep = error_vs_bound(stats, ode, Graphon::constant(1.0), graph, false);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    EXPECT_LE(rep.error[t], rep.mc_halfwidth[t] + 1e-3) << grid[t];
  }
  // Half-width oracle at t = 1: every particle has the same p.
  const double p = 0.5 + 0.5 * std::exp(-2.0);
  EXPECT_NEAR(rep.mc_halfwidth[2], 3.0 * std::sqrt(2.0 * p * (1 - p) / 20000.0), 2e-4);
}

TEST(ErrorVsBound, StochasticCarriesPsi) {
  const Graphon g = Graphon::constant(0.5);
  const auto graph = sample_stochastic(g, 40, 2);
  const PairwiseKernel kernel(RateModel::sis(1.0, 1.0), graph);
  const std::vector<StateIndex> init(40, 0);
  const std::vector<double> grid{0.0};
  const auto stats = ensemble_mean(2, init, kernel, grid, 1);
  const auto rep = error_vs_bound(stats, stats.mean_fields(), g, graph, true);
  ASSERT_TRUE(rep.psi_term.has_value());
  EXPECT_NEAR(*rep.psi_term, psi_bound({40, 2.0 / 40, 0.0, 1}), 1e-12);
  const auto j = to_json(rep);
  EXPECT_EQ(j.at("n"), 40);
  EXPECT_TRUE(j.contains("psi_term"));
}

}  // namespace
}  // namespace gmf
