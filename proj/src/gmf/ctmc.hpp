#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "gmf/dynamics.hpp"
#include "gmf/field.hpp"
#include "gmf/graphon.hpp"
#include "gmf/rng.hpp"

namespace gmf {

struct Transition {
  StateIndex target;
  double rate;
};

/// Configuration of the N-particle chain plus the rate caches the kernel
/// maintains for it. `totals[k]` is the cached total outgoing rate of
/// particle k and `total_rate` their sum; `aux` is kernel-private storage.
/// Kernels with their own select() may leave `totals` empty.
struct SystemState {
  std::vector<StateIndex> states;
  double time = 0.0;
  std::vector<double> totals;
  double total_rate = 0.0;
  std::vector<double> aux;
  std::uint64_t events = 0;
};

/// Transition structure of a particle system. A kernel is immutable and may
/// be shared by many threads; everything that changes along a trajectory
/// lives in SystemState.
class TransitionKernel {
 public:
  virtual ~TransitionKernel() = default;
  virtual std::size_t particle_count() const = 0;
  virtual std::size_t state_count() const = 0;

  /// Throws InvariantViolation if `states` is not a valid configuration.
  virtual void validate(std::span<const StateIndex> states) const;
  /// Recomputes aux, totals and total_rate of `st` from st.states.
  virtual void refresh(SystemState& st) const = 0;
  /// Enabled transitions (rate > 0) of particle k in its current state.
  virtual void transitions(const SystemState& st, std::size_t k,
                           std::vector<Transition>& out) const = 0;
  /// Moves particle k to `target` and updates the caches incrementally.
  virtual void apply(SystemState& st, std::size_t k, StateIndex target) const = 0;

  /// Draws the next event given st.total_rate > 0: particle k with
  /// probability totals[k] / total_rate, then a target with probability
  /// proportional to its rate. Returns false if the caches claim a rate that
  /// no transition carries. Kernels that override this may keep `totals`
  /// empty and maintain only total_rate.
  virtual bool select(const SystemState& st, rng::Engine& eng,
                      std::vector<Transition>& scratch, std::size_t& k,
                      StateIndex& target) const;
};

/// Pairwise-framework kernel: particle k jumps s -> s' at rate
///   r^uni(k/N, s, s') + sum_l r^pair(k/N, l/N, s, s', S_l) G_kl / N.
/// Caches the pairwise sum per (k, s'); a jump of particle j touches the
/// caches of the l with G_lj > 0 and rebuilds j's own in O(N |S|).
class PairwiseKernel final : public TransitionKernel {
 public:
  PairwiseKernel(RateModel rm, WeightedGraph graph);

  std::size_t particle_count() const override { return graph_.n(); }
  std::size_t state_count() const override { return rm_.state_count(); }
  void refresh(SystemState& st) const override;
  void transitions(const SystemState& st, std::size_t k,
                   std::vector<Transition>& out) const override;
  void apply(SystemState& st, std::size_t k, StateIndex target) const override;

 private:
  double pair_term(std::size_t k, std::size_t l, StateIndex from, StateIndex to,
                   StateIndex partner) const;
  void rebuild_particle(SystemState& st, std::size_t k) const;
  double particle_total(const SystemState& st, std::size_t k) const;

  RateModel rm_;
  WeightedGraph graph_;
  std::vector<double> uni_;                      // [k][from][to]
  std::vector<std::vector<std::size_t>> in_nbrs_;  // l with G_lk > 0, l != k
};

SystemState make_state(const TransitionKernel& kernel,
                       std::vector<StateIndex> initial);

struct StepEvent {
  bool absorbed = false;
  double holding_time = 0.0;
  std::size_t particle = 0;
  StateIndex from = 0;
  StateIndex to = 0;
};

/// Direct-method step: exponential holding time with the total rate, then
/// particle k with probability totals[k]/total and target with probability
/// proportional to its rate. Returns absorbed = true (state and time
/// unchanged) when no transition is enabled.
StepEvent step_gillespie(SystemState& st, const TransitionKernel& kernel,
                         rng::Engine& eng);

// Full cache recompute every this many events; cached totals must agree with
// the recomputed ones to 1e-9 relative or InvariantViolation is thrown.
inline constexpr std::uint64_t kRefreshInterval = 100000;

/// Runs one trajectory and calls observe(grid_index, states) with the state
/// at each grid time (the state after the last event at or before it).
/// The RNG stream is rng::stream(seed, trajectory_index).
void run_trajectory(
    std::span<const StateIndex> initial, const TransitionKernel& kernel,
    std::span<const double> time_grid, std::uint64_t seed,
    std::uint64_t trajectory_index,
    const std::function<void(std::size_t, std::span<const StateIndex>)>& observe);

// Per-grid-time snapshots of one trajectory.
std::vector<std::vector<StateIndex>> simulate_trajectory(
    std::span<const StateIndex> initial, const TransitionKernel& kernel,
    std::span<const double> time_grid, std::uint64_t seed,
    std::uint64_t trajectory_index);

/// Integer occupancy counts over R trajectories: counts[t][k][s] is the
/// number of trajectories with particle k in state s at time_grid[t].
class EnsembleStats {
 public:
  EnsembleStats(std::vector<double> time_grid, std::size_t particles,
                std::size_t states, std::uint64_t runs);

  const std::vector<double>& time_grid() const { return time_grid_; }
  std::size_t particles() const { return particles_; }
  std::size_t states() const { return states_; }
  std::uint64_t runs() const { return runs_; }

  std::uint64_t count(std::size_t t, std::size_t k, std::size_t s) const {
    return counts_[(t * particles_ + k) * states_ + s];
  }
  std::uint64_t& count(std::size_t t, std::size_t k, std::size_t s) {
    return counts_[(t * particles_ + k) * states_ + s];
  }
  double mean(std::size_t t, std::size_t k, std::size_t s) const {
    return static_cast<double>(count(t, k, s)) / static_cast<double>(runs_);
  }
  // Ensemble mean at time_grid[t] as a field at resolution N.
  OccupancyField mean_field(std::size_t t) const;
  std::vector<OccupancyField> mean_fields() const;

  void merge(const EnsembleStats& other);
  // Columns t,k,s,count,mean with 1-based k.
  void write_csv(const std::filesystem::path& path) const;

  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  std::vector<double> time_grid_;
  std::size_t particles_;
  std::size_t states_;
  std::uint64_t runs_;
  std::vector<std::uint64_t> counts_;
};

/// R independent trajectories (indices 0..R-1 under `seed`), aggregated as
/// integer counts. The result does not depend on `threads`.
EnsembleStats ensemble_mean(std::uint64_t runs, std::span<const StateIndex> initial,
                            const TransitionKernel& kernel,
                            std::span<const double> time_grid, std::uint64_t seed,
                            unsigned threads = 1);

struct DegreeStats {
  std::vector<double> degree;     // d^N(k) = sum_l G_kl
  std::vector<double> expected;   // E[d^N(k)]
  std::vector<double> gamma;      // sqrt(3 log N / E[d^N(k)])
  double min_degree = 0.0;
  double mean_degree = 0.0;
  std::vector<std::size_t> isolated;  // 0-based nodes of degree 0
  std::size_t chernoff_failures = 0;  // nodes with d < (1 - gamma) E[d]
  bool chernoff_ok = false;
};

/// Degree statistics and the multiplicative Chernoff check. With a graphon
/// the expected degree of node k is sum_l g(k/N, l/N) (exact for stochastic
/// samples); without one, the empirical mean degree is used for every node.
DegreeStats degree_stats(const WeightedGraph& graph, const Graphon* g = nullptr);

}  // namespace gmf
