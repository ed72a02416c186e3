#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gmf/ctmc.hpp"
#include "gmf/dynamics.hpp"
#include "gmf/graphon.hpp"

namespace gmf {
namespace {

PairwiseKernel two_state_kernel(std::size_t n, double a = 1.0, double b = 1.0) {
  return PairwiseKernel(RateModel::two_state(a, b),
                        discretize_deterministic(Graphon::constant(1.0), n));
}

TEST(Gillespie, ZeroRatesAbsorb) {
  const auto kernel = two_state_kernel(3, 0.0, 0.0);
  auto st = make_state(kernel, {0, 1, 0});
  auto eng = rng::stream(1, 0);
  const auto ev = step_gillespie(st, kernel, eng);
  EXPECT_TRUE(ev.absorbed);
  EXPECT_EQ(st.time, 0.0);
  EXPECT_EQ(st.states, (std::vector<StateIndex>{0, 1, 0}));
}

TEST(Gillespie, ExponentialHoldingTimes) {
  const auto kernel = two_state_kernel(1);
  auto st = make_state(kernel, {0});
  auto eng = rng::stream(42, 0);
  const int events = 100000;
  std::vector<double> holds;
  holds.reserve(events);
  for (int i = 0; i < events; ++i) {
    const auto ev = step_gillespie(st, kernel, eng);
    ASSERT_FALSE(ev.absorbed);
    ASSERT_NE(ev.from, ev.to);
    holds.push_back(ev.holding_time);
  }
  double mean = 0.0;
  for (double h : holds) mean += h;
  mean /= events;
  EXPECT_GE(mean, 0.99);
  EXPECT_LE(mean, 1.01);

  // Kolmogorov-Smirnov against Exp(1) at the 0.1% level.
  std::sort(holds.begin(), holds.end());
  double ks = 0.0;
  for (int i = 0; i < events; ++i) {
    const double f = 1.0 - std::exp(-holds[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / events),
                   std::abs(f - static_cast<double>(i + 1) / events)});
  }
  EXPECT_LT(ks, 1.95 / std::sqrt(static_cast<double>(events)));
}

TEST(PairwiseKernel, SisTransitions) {
  const PairwiseKernel kernel(RateModel::sis(1.0, 0.0),
                              discretize_deterministic(Graphon::constant(1.0), 2));
  const auto st = make_state(kernel, {1, 0});
  std::vector<Transition> out;
  kernel.transitions(st, 0, out);
  EXPECT_TRUE(out.empty());
  kernel.transitions(st, 1, out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target, 1);
  EXPECT_DOUBLE_EQ(out[0].rate, 0.5);
  EXPECT_DOUBLE_EQ(st.total_rate, 0.5);
}

TEST(PairwiseKernel, CachesTrackFullRecompute) {
  const PairwiseKernel kernel(RateModel::sis(2.0, 1.0),
                              sample_stochastic(Graphon::triangular(), 30, 4));
  auto st = make_state(kernel, std::vector<StateIndex>(30, 0));
  st.states[0] = 1;
  kernel.refresh(st);
  auto eng = rng::stream(3, 0);
  for (int i = 0; i < 500 && !step_gillespie(st, kernel, eng).absorbed; ++i) {
    SystemState fresh = st;
    kernel.refresh(fresh);
    ASSERT_NEAR(st.total_rate, fresh.total_rate, 1e-9 * (1.0 + fresh.total_rate));
  }
}

TEST(Trajectory, ZeroRatesStayPut) {
  const auto kernel = two_state_kernel(4, 0.0, 0.0);
  const std::vector<StateIndex> init{0, 1, 1, 0};
  const std::vector<double> grid{0.0, 0.5, 3.0};
  const auto snaps = simulate_trajectory(init, kernel, grid, 5, 0);
  ASSERT_EQ(snaps.size(), 3u);
  for (const auto& s : snaps) EXPECT_EQ(s, init);
}

TEST(Trajectory, Deterministic) {
  const PairwiseKernel kernel(RateModel::sis(2.0, 1.0),
                              sample_stochastic(Graphon::triangular(), 20, 4));
  std::vector<StateIndex> init(20, 0);
  init[3] = 1;
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
  EXPECT_EQ(simulate_trajectory(init, kernel, grid, 77, 3),
            simulate_trajectory(init, kernel, grid, 77, 3));
  EXPECT_NE(simulate_trajectory(init, kernel, grid, 77, 3),
            simulate_trajectory(init, kernel, grid, 77, 4));
}

TEST(Ensemble, TwoStateFractionAtOne) {
  const auto kernel = two_state_kernel(1);
  const std::vector<double> grid{0.0, 1.0};
  const auto stats = ensemble_mean(20000, std::vector<StateIndex>{0}, kernel, grid, 2024);
  const double p = 0.5 + 0.5 * std::exp(-2.0);
  EXPECT_NEAR(stats.mean(1, 0, 0), p, 0.011);
  EXPECT_EQ(stats.mean(0, 0, 0), 1.0);
}

TEST(Ensemble, SingleRunIsIndicator) {
  const PairwiseKernel kernel(RateModel::sis(2.0, 1.0),
                              discretize_deterministic(Graphon::triangular(), 6));
  const std::vector<StateIndex> init{1, 0, 0, 1, 0, 0};
  const std::vector<double> grid{0.0, 0.7, 1.5};
  const auto stats = ensemble_mean(1, init, kernel, grid, 9);
  const auto snaps = simulate_trajectory(init, kernel, grid, 9, 0);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const auto field = stats.mean_field(t);
    const auto ind = OccupancyField::indicator(snaps[t], 2, 6);
    EXPECT_EQ(field.values(), ind.values());
  }
}

TEST(Ensemble, ZeroRatesGiveInitialIndicator) {
  const auto kernel = two_state_kernel(3, 0.0, 0.0);
  const std::vector<StateIndex> init{1, 0, 1};
  const std::vector<double> grid{0.0, 1.0};
  const auto stats = ensemble_mean(50, init, kernel, grid, 1);
  for (std::size_t t = 0; t < 2; ++t)
    EXPECT_EQ(stats.mean_field(t).values(), OccupancyField::indicator(init, 2, 3).values());
}

TEST(Ensemble, CountsSumToRunsAndIgnoreThreads) {
  const PairwiseKernel kernel(RateModel::sis(2.0, 1.0),
                              sample_stochastic(Graphon::triangular(), 15, 8));
  std::vector<StateIndex> init(15, 0);
  init[0] = init[7] = 1;
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto one = ensemble_mean(301, init, kernel, grid, 12, 1);
  const auto four = ensemble_mean(301, init, kernel, grid, 12, 4);
  EXPECT_EQ(one.counts(), four.counts());
  EXPECT_EQ(one.runs(), 301u);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    for (std::size_t k = 0; k < 15; ++k) {
      EXPECT_EQ(one.count(t, k, 0) + one.count(t, k, 1), 301u);
    }
  }
}

TEST(Ensemble, TwoStateWithinThreeSigmaOnGrid) {
  const auto kernel = two_state_kernel(1);
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.2 * i);
  const auto stats = ensemble_mean(20000, std::vector<StateIndex>{0}, kernel, grid, 99);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const double p = 0.5 + 0.5 * std::exp(-2.0 * grid[t]);
    const double sigma = std::sqrt(p * (1.0 - p) / 20000.0);
    EXPECT_LE(std::abs(stats.mean(t, 0, 0) - p), 3.0 * sigma + 1e-12) << grid[t];
  }
}

TEST(DegreeStats, CompleteGraph) {
  const auto g = discretize_deterministic(Graphon::constant(1.0), 10);
  const auto d = degree_stats(g);
  for (double x : d.degree) EXPECT_EQ(x, 10.0);
  EXPECT_TRUE(d.isolated.empty());
  EXPECT_EQ(d.min_degree, 10.0);
}

TEST(DegreeStats, EmptyGraph) {
  const WeightedGraph g(5, std::vector<double>(25, 0.0));
  const auto d = degree_stats(g);
  EXPECT_EQ(d.isolated.size(), 5u);
}

TEST(DegreeStats, ChernoffAtFiveHundred) {
  const Graphon half = Graphon::constant(0.5);
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto d = degree_stats(sample_stochastic(half, 500, seed), &half);
    const double gamma = std::sqrt(3.0 * std::log(500.0) / 250.0);
    EXPECT_NEAR(d.gamma[0], gamma, 1e-12);
    if (d.min_degree >= (1.0 - gamma) * 250.0) ++ok;
  }
  EXPECT_GE(ok, 49);
}

}  // namespace
}  // namespace gmf
