#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmf/ctmc.hpp"
#include "gmf/dynamics.hpp"
#include "gmf/field.hpp"
#include "gmf/graphon.hpp"

namespace gmf {

// ---------------------------------------------------------------------------
// JSQ(2) load balancing on a graph of server/dispatcher pairs.

struct LoadBalancingParams {
  double lambda = 1.0;       // job arrivals per dispatcher
  double mu = 1.1;           // service rate
  std::size_t capacity = 10;  // buffer size K_L; states 0..K_L
};

/// A sampled server graph together with the quantities the JSQ(2) rates
/// need: degrees d(k) = sum_l G_kl and the dispatch weights
/// W_kl = G_kl/d(k) + G_kl/d(l), where terms with a zero degree vanish.
class LoadBalancingModel {
 public:
  LoadBalancingModel(LoadBalancingParams params, WeightedGraph graph);

  const LoadBalancingParams& params() const { return params_; }
  const WeightedGraph& graph() const { return graph_; }
  std::size_t n() const { return graph_.n(); }
  StateSpace states() const { return StateSpace::range(params_.capacity + 1); }
  const std::vector<double>& degrees() const { return degrees_; }
  double weight(std::size_t k, std::size_t l) const { return weights_[k * n() + l]; }
  // T_kl = W_kl N / 16
  WeightedGraph tilde_graph() const;

 private:
  LoadBalancingParams params_;
  WeightedGraph graph_;
  std::vector<double> degrees_;
  std::vector<double> weights_;
};

/// Enabled transitions of server k, computed from scratch:
///   s -> s+1 at lambda sum_l W_kl (1{S_l = s}/2 + 1{S_l > s}) if s < K_L,
///   s -> s-1 at mu if s > 0.
std::vector<Transition> lb_transition_rates(const LoadBalancingModel& model,
                                            std::span<const StateIndex> states,
                                            std::size_t k);

/// Simulator kernel. aux[k] caches A_k = sum_l W_kl f(S_l, S_k) with
/// f(x, s) = 1{x = s}/2 + 1{x > s}.
class LoadBalancingKernel final : public TransitionKernel {
 public:
  explicit LoadBalancingKernel(const LoadBalancingModel& model);

  std::size_t particle_count() const override { return n_; }
  std::size_t state_count() const override { return params_.capacity + 1; }
  void refresh(SystemState& st) const override;
  void transitions(const SystemState& st, std::size_t k,
                   std::vector<Transition>& out) const override;
  void apply(SystemState& st, std::size_t k, StateIndex target) const override;

 private:
  double arrival_sum(std::span<const StateIndex> states, std::size_t k) const;
  double particle_total(const SystemState& st, std::size_t k) const;

  LoadBalancingParams params_;
  std::size_t n_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> nbrs_;  // l != k with W_lk > 0
};

/// Load-balancing drift at resolution gamma in conservative form: the
/// arrival flow x_{i,s} lambda (1/gamma) sum_j W_ij (x_{j,s}/2 + sum_{s'>s} x_{j,s'})
/// moves mass s -> s+1 and the service flow mu x_{i,s} moves s -> s-1.
/// W_ij = G_ij/d_i + G_ij/d_j with d_i = (1/gamma) sum_j G_ij.
class LoadBalancingDrift final : public FieldDrift {
 public:
  static LoadBalancingDrift from_graphon(const Graphon& g, const LoadBalancingParams& p,
                                         std::size_t gamma);
  // Finite-N drift on the graph itself (gamma = N).
  static LoadBalancingDrift from_graph(const WeightedGraph& graph,
                                       const LoadBalancingParams& p);

  std::size_t resolution() const override { return gamma_; }
  std::size_t state_count() const override { return params_.capacity + 1; }
  void evaluate(const OccupancyField& x, OccupancyField& out) const override;
  /// 2 (lambda w + mu) + 2 lambda omega sqrt(|S|) with
  /// w = max_i (1/gamma) sum_j W_ij and omega = max_i sqrt((1/gamma) sum_j W_ij^2).
  double lipschitz_bound() const override { return lipschitz_; }

 private:
  LoadBalancingDrift(const LoadBalancingParams& p, std::size_t gamma,
                     std::vector<double> kernel);

  LoadBalancingParams params_;
  std::size_t gamma_;
  std::vector<double> weights_;  // W_ij / gamma
  double lipschitz_ = 0.0;
};

// ---------------------------------------------------------------------------
// Bike sharing with station popularity.

struct BikeSharingParams {
  double lambda = 1.0;        // customer (departure) rate per station
  double mu = 1.0;            // travel rate
  std::size_t capacity = 10;  // K_B; states 0..K_B
  double alpha = 5.0;         // bikes per station, M = floor(alpha N)
  double popularity_a = 1.0;  // p(v) = a - b v
  double popularity_b = 0.5;
};

/// Stations on the deterministic discretization of G_B(u,v) = p(v)/\int p.
/// The arrival weight of station k is w_k = (1/N) sum_l G_lk, which equals
/// p(k/N)/\int p for the discretized graphon. Travel completions are
/// counted per station: a bike in transit ends at station k at rate
/// w_k mu (M - sum_l S_l) / N.
class BikeSharingModel {
 public:
  BikeSharingModel(BikeSharingParams params, std::size_t n);
  BikeSharingModel(BikeSharingParams params, WeightedGraph graph);

  const BikeSharingParams& params() const { return params_; }
  const Graphon& graphon() const { return graphon_; }
  const WeightedGraph& graph() const { return graph_; }
  std::size_t n() const { return graph_.n(); }
  std::size_t fleet() const { return fleet_; }
  StateSpace states() const { return StateSpace::range(params_.capacity + 1); }
  const std::vector<double>& station_weights() const { return weights_; }
  // M bikes spread as evenly as possible, lower-index stations first.
  std::vector<StateIndex> initial_state() const;

 private:
  BikeSharingParams params_;
  Graphon graphon_;
  WeightedGraph graph_;
  std::size_t fleet_;
  std::vector<double> weights_;
};

/// Enabled transitions of station k:
///   s -> s-1 at lambda if s > 0,
///   s -> s+1 at w_k mu (M - sum_l S_l) / N if s < K_B.
/// Throws InvariantViolation when the fleet accounting is broken.
std::vector<Transition> bike_transition_rates(const BikeSharingModel& model,
                                              std::span<const StateIndex> states,
                                              std::size_t k);

/// aux caches the number of parked bikes, the number of nonempty stations
/// and the summed weight of stations below capacity; events are drawn from
/// these aggregates, so `totals` stays empty.
class BikeSharingKernel final : public TransitionKernel {
 public:
  explicit BikeSharingKernel(const BikeSharingModel& model);

  std::size_t particle_count() const override { return weights_.size(); }
  std::size_t state_count() const override { return params_.capacity + 1; }
  void validate(std::span<const StateIndex> states) const override;
  void refresh(SystemState& st) const override;
  void transitions(const SystemState& st, std::size_t k,
                   std::vector<Transition>& out) const override;
  void apply(SystemState& st, std::size_t k, StateIndex target) const override;
  bool select(const SystemState& st, rng::Engine& eng, std::vector<Transition>& scratch,
              std::size_t& k, StateIndex& target) const override;

 private:
  double travel_intensity(const SystemState& st) const;
  void update_total(SystemState& st) const;

  BikeSharingParams params_;
  std::size_t fleet_;
  std::vector<double> weights_;
};

/// Bike drift at resolution gamma. The in-transit mass per station is
/// m(x) = fleet_per_station - (1/gamma) sum_j sum_s s x_{j,s}; arrivals at
/// cell i move x_{i,s} w_i mu m(x) from s to s+1 (s < K_B), departures move
/// lambda x_{i,s} from s to s-1 (s > 0). w_i = (1/gamma) sum_j G(j/gamma, i/gamma).
/// A negative in-transit mass raises InvariantViolation.
class BikeSharingDrift final : public FieldDrift {
 public:
  // fleet_per_station = 0 selects alpha.
  static BikeSharingDrift from_graphon(const Graphon& g, const BikeSharingParams& p,
                                       std::size_t gamma, double fleet_per_station = 0.0);
  // Finite-N drift of a model (gamma = N, fleet M/N).
  static BikeSharingDrift from_model(const BikeSharingModel& model);

  std::size_t resolution() const override { return weights_.size(); }
  std::size_t state_count() const override { return params_.capacity + 1; }
  void evaluate(const OccupancyField& x, OccupancyField& out) const override;
  /// 2 (lambda + w mu max(f, K_B)) + 2 w mu sqrt(sum_s s^2), w = max_i w_i.
  double lipschitz_bound() const override { return lipschitz_; }
  double fleet_per_station() const { return fleet_per_station_; }

 private:
  BikeSharingDrift(const BikeSharingParams& p, std::vector<double> weights,
                   double fleet_per_station);

  BikeSharingParams params_;
  std::vector<double> weights_;
  double fleet_per_station_;
  double lipschitz_ = 0.0;
};

}  // namespace gmf
