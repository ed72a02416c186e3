#include "gmf/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "gmf/error.hpp"
#include "gmf/kernel_norm.hpp"

namespace gmf {

RateModel RateModel::two_state(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw InvalidArgument("two-state rates must be >= 0");
  RateModel rm{.name = "two_state",
               .states = StateSpace({"s0", "s1"}),
               .uni = [a, b](double, StateIndex from, StateIndex) { return from == 0 ? a : b; },
               .pair = {}};
  rm.rate_bound = std::max(a, b);
  return rm;
}

RateModel RateModel::sis(double beta, double gamma) {
  if (!(beta >= 0.0) || !(gamma >= 0.0)) throw InvalidArgument("SIS rates must be >= 0");
  RateModel rm{.name = "sis",
               .states = StateSpace({"S", "I"}),
               .uni = [gamma](double, StateIndex from, StateIndex) { return from == 1 ? gamma : 0.0; },
               .pair = [beta](double, double, StateIndex from, StateIndex, StateIndex partner) {
                 return (from == 0 && partner == 1) ? beta : 0.0;
               }};
  rm.rate_bound = std::max(beta, gamma);
  return rm;
}

std::vector<double> uni_rate_matrix(const RateModel& rm, double u) {
  const std::size_t n = rm.state_count();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      const auto from = static_cast<StateIndex>(t);
      const auto to = static_cast<StateIndex>(s);
      const double r = rm.uni_rate(u, from, to);
      m[s * n + t] += r;  // inflow into s from t
      m[t * n + t] -= r;  // outflow from t
    }
  }
  return m;
}

std::vector<double> pair_rate_matrix(const RateModel& rm, double u, double v) {
  const std::size_t n = rm.state_count();
  std::vector<double> m(n * n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      for (std::size_t p = 0; p < n; ++p) {
        const double r = rm.pair_rate(u, v, static_cast<StateIndex>(t),
                                      static_cast<StateIndex>(s),
                                      static_cast<StateIndex>(p));
        m[(s * n + t) * n + p] += r;
        m[(t * n + t) * n + p] -= r;
      }
    }
  }
  return m;
}

PairwiseDrift::PairwiseDrift(
    const RateModel& rm, std::size_t resolution,
    const std::function<double(std::size_t, std::size_t)>& kernel)
    : resolution_(resolution), states_(rm.state_count()), uni_(resolution) {
  if (resolution_ == 0) throw InvalidArgument("drift resolution must be >= 1");
  const double gd = static_cast<double>(resolution_);
  auto pos = [gd](std::size_t i) { return static_cast<double>(i + 1) / gd; };

  for (std::size_t i = 0; i < resolution_; ++i) {
    for (std::size_t from = 0; from < states_; ++from) {
      for (std::size_t to = 0; to < states_; ++to) {
        const double r = rm.uni_rate(pos(i), static_cast<StateIndex>(from),
                                     static_cast<StateIndex>(to));
        if (r < 0.0) throw InvalidArgument("negative unilateral rate in " + rm.name);
        if (r > 0.0) {
          uni_[i].push_back({static_cast<StateIndex>(from), static_cast<StateIndex>(to), r});
        }
      }
    }
  }

  if (rm.pair) {
    std::vector<double> kgrid(resolution_ * resolution_);
    for (std::size_t i = 0; i < resolution_; ++i) {
      for (std::size_t j = 0; j < resolution_; ++j) kgrid[i * resolution_ + j] = kernel(i, j);
    }
    for (std::size_t from = 0; from < states_; ++from) {
      for (std::size_t to = 0; to < states_; ++to) {
        if (from == to) continue;
        for (std::size_t partner = 0; partner < states_; ++partner) {
          PairTerm term{static_cast<StateIndex>(from), static_cast<StateIndex>(to),
                        static_cast<StateIndex>(partner),
                        std::vector<double>(resolution_ * resolution_)};
          bool active = false;
          for (std::size_t i = 0; i < resolution_; ++i) {
            for (std::size_t j = 0; j < resolution_; ++j) {
              const double r = rm.pair_rate(pos(i), pos(j), term.from, term.to, term.partner);
              if (r < 0.0) throw InvalidArgument("negative pairwise rate in " + rm.name);
              const double w = r * kgrid[i * resolution_ + j] / gd;
              term.weights[i * resolution_ + j] = w;
              active = active || w != 0.0;
            }
          }
          if (active) pair_.push_back(std::move(term));
        }
      }
    }
    if (!pair_.empty()) kernel_opnorm_ = step_kernel_opnorm(kgrid, resolution_).norm;
  }
  lipschitz_ = drift_lipschitz_bound(rm, kernel_opnorm_);
}

PairwiseDrift PairwiseDrift::from_graphon(const RateModel& rm, const Graphon& g,
                                          std::size_t gamma) {
  const double gd = static_cast<double>(gamma);
  return PairwiseDrift(rm, gamma, [&g, gd](std::size_t i, std::size_t j) {
    return g(static_cast<double>(i + 1) / gd, static_cast<double>(j + 1) / gd);
  });
}

PairwiseDrift PairwiseDrift::from_graph(const RateModel& rm,
                                        const WeightedGraph& graph) {
  return PairwiseDrift(rm, graph.n(),
                       [&graph](std::size_t k, std::size_t l) { return graph(k, l); });
}

void PairwiseDrift::evaluate(const OccupancyField& x, OccupancyField& out) const {
  if (x.resolution() != resolution_ || x.state_count() != states_) {
    throw InvalidArgument("field shape does not match the drift (resolution " +
                          std::to_string(x.resolution()) + " vs " +
                          std::to_string(resolution_) + ")");
  }
  if (out.resolution() != resolution_ || out.state_count() != states_) {
    out = OccupancyField(resolution_, states_);
  } else {
    std::fill(out.values().begin(), out.values().end(), 0.0);
  }
  for (std::size_t i = 0; i < resolution_; ++i) {
    for (const UniTerm& t : uni_[i]) {
      const double flow = t.rate * x(i, t.from);
      out(i, t.to) += flow;
      out(i, t.from) -= flow;
    }
  }
  for (const PairTerm& t : pair_) {
    for (std::size_t i = 0; i < resolution_; ++i) {
      const double xi = x(i, t.from);
      if (xi == 0.0) continue;
      const double* w = t.weights.data() + i * resolution_;
      double acc = 0.0;
      for (std::size_t j = 0; j < resolution_; ++j) acc += w[j] * x(j, t.partner);
      const double flow = xi * acc;
      out(i, t.to) += flow;
      out(i, t.from) -= flow;
    }
  }
}

OccupancyField drift_finite(const OccupancyField& x, const WeightedGraph& graph,
                            const RateModel& rm) {
  if (x.resolution() != graph.n()) {
    throw InvalidArgument("finite drift needs a field at resolution N = graph size");
  }
  return PairwiseDrift::from_graph(rm, graph)(x);
}

OccupancyField drift_graphon(const OccupancyField& x, const Graphon& g,
                             const RateModel& rm) {
  return PairwiseDrift::from_graphon(rm, g, x.resolution())(x);
}

double drift_lipschitz_bound(const RateModel& rm, double g_opnorm) {
  if (!(g_opnorm >= 0.0)) throw InvalidArgument("operator norm must be >= 0");
  const double s = static_cast<double>(rm.state_count());
  const double c = rm.rate_bound;
  return 2.0 * (c * s * s + 2.0 * c * s * s * s * g_opnorm);
}

double l2_norm(const OccupancyField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum / static_cast<double>(f.resolution()));
}

}  // namespace gmf
