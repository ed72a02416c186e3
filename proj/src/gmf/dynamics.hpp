#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "gmf/field.hpp"
#include "gmf/graphon.hpp"

namespace gmf {

/// Unilateral and pairwise transition rates of the interaction model.
///
/// uni(u, s, s') is the rate at which a particle at position u jumps from s
/// to s'; pair(u, v, s, s', s_l) the rate contributed by a partner at v in
/// state s_l (later weighted by the kernel and averaged over partners).
/// Either callable may be empty. Self transitions carry no rate.
struct RateModel {
  using Uni = std::function<double(double u, StateIndex from, StateIndex to)>;
  using Pair = std::function<double(double u, double v, StateIndex from,
                                    StateIndex to, StateIndex partner)>;

  std::string name;
  StateSpace states;
  Uni uni;
  Pair pair;
  double rate_bound = 0.0;  // C_R: every rate is <= rate_bound
  double lipschitz = 0.0;
  std::vector<double> breakpoints{0.0, 1.0};

  std::size_t state_count() const { return states.size(); }
  double uni_rate(double u, StateIndex from, StateIndex to) const {
    return (from == to || !uni) ? 0.0 : uni(u, from, to);
  }
  double pair_rate(double u, double v, StateIndex from, StateIndex to,
                   StateIndex partner) const {
    return (from == to || !pair) ? 0.0 : pair(u, v, from, to, partner);
  }

  // Two states with s0 -> s1 at rate a and s1 -> s0 at rate b.
  static RateModel two_state(double a, double b);
  // Susceptible (0) / infected (1): infection at rate beta per infected
  // partner, recovery at rate gamma.
  static RateModel sis(double beta, double gamma);
};

/// R^uni_{u,s}: |S| x |S| row-major; entry [s][s'] is uni(u, s', s) for
/// s' != s and -sum_t uni(u, s, t) on the diagonal. Columns sum to zero.
std::vector<double> uni_rate_matrix(const RateModel& rm, double u);

/// R^pair_{u,v,s}: |S| x |S| x |S| with index [s][s'][s_l], built the same
/// way from pair(u, v, s', s, s_l).
std::vector<double> pair_rate_matrix(const RateModel& rm, double u, double v);

/// A drift field F acting on occupancy fields of a fixed resolution.
class FieldDrift {
 public:
  virtual ~FieldDrift() = default;
  virtual std::size_t resolution() const = 0;
  virtual std::size_t state_count() const = 0;
  virtual void evaluate(const OccupancyField& x, OccupancyField& out) const = 0;
  // L2 Lipschitz constant on the simplex, used for the solver step guard.
  virtual double lipschitz_bound() const = 0;

  OccupancyField operator()(const OccupancyField& x) const {
    OccupancyField out(resolution(), state_count());
    evaluate(x, out);
    return out;
  }
};

/// The pairwise-framework drift
///   F_{i,s}(x) = R^uni_{i,s} x_i + x_i^T sum_j R^pair_{i,j,s} W_ij x_j
/// with the kernel weights W_ij pre-multiplied by 1/resolution. Rates are
/// tabulated once at construction (only triples (s, s', s_l) that are
/// nonzero somewhere on the grid are kept), so evaluation is a pure sweep.
class PairwiseDrift final : public FieldDrift {
 public:
  /// Graphon drift at resolution gamma: rates and kernel at (i/gamma, j/gamma).
  static PairwiseDrift from_graphon(const RateModel& rm, const Graphon& g,
                                    std::size_t gamma);
  /// Finite-N drift: rates at (k/N, l/N), kernel G^N_{kl}.
  static PairwiseDrift from_graph(const RateModel& rm, const WeightedGraph& graph);

  std::size_t resolution() const override { return resolution_; }
  std::size_t state_count() const override { return states_; }
  void evaluate(const OccupancyField& x, OccupancyField& out) const override;
  double lipschitz_bound() const override { return lipschitz_; }
  double kernel_opnorm() const { return kernel_opnorm_; }

 private:
  struct UniTerm {
    StateIndex from, to;
    double rate;
  };
  struct PairTerm {
    StateIndex from, to, partner;
    std::vector<double> weights;  // resolution^2, rate * kernel / resolution
  };

  PairwiseDrift(const RateModel& rm, std::size_t resolution,
                const std::function<double(std::size_t, std::size_t)>& kernel);

  std::size_t resolution_;
  std::size_t states_;
  std::vector<std::vector<UniTerm>> uni_;  // per cell
  std::vector<PairTerm> pair_;
  double kernel_opnorm_ = 0.0;
  double lipschitz_ = 0.0;
};

/// Finite-N drift of a configuration or ensemble mean x at resolution N.
OccupancyField drift_finite(const OccupancyField& x, const WeightedGraph& graph,
                            const RateModel& rm);

/// Graphon drift of x at x's resolution with a right-endpoint step
/// discretization of the integral.
OccupancyField drift_graphon(const OccupancyField& x, const Graphon& g,
                             const RateModel& rm);

/// 2 (C_R |S|^2 + 2 C_R |S|^3 ||G||): Lipschitz constant of the graphon drift
/// on fields with values in [0, 1].
double drift_lipschitz_bound(const RateModel& rm, double g_opnorm);

// L2 norm of a field viewed as a step function: sqrt(sum_s \int f^2).
double l2_norm(const OccupancyField& f);

}  // namespace gmf
