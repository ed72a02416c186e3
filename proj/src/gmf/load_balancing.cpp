#include <algorithm>
#include <cmath>
#include <string>

#include "gmf/error.hpp"
#include "gmf/models.hpp"

namespace gmf {

namespace {

// Share of a job that server k at level s wins against a server at level x.
inline double win_share(StateIndex x, StateIndex s) {
  return x == s ? 0.5 : (x > s ? 1.0 : 0.0);
}

void check_params(const LoadBalancingParams& p) {
  if (!(p.lambda >= 0.0) || !(p.mu >= 0.0) || !std::isfinite(p.lambda) ||
      !std::isfinite(p.mu)) {
    throw InvalidArgument("load balancing rates must be finite and >= 0");
  }
  if (p.capacity == 0) throw InvalidArgument("buffer size K_L must be >= 1");
}

// W_ij = G_ij/d_i + G_ij/d_j for a square kernel grid and its degrees.
std::vector<double> dispatch_weights(std::span<const double> g,
                                     std::span<const double> degree) {
  const std::size_t n = degree.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double gij = g[i * n + j];
      if (gij == 0.0) continue;
      double v = 0.0;
      if (degree[i] > 0.0) v += gij / degree[i];
      if (degree[j] > 0.0) v += gij / degree[j];
      w[i * n + j] = v;
    }
  }
  return w;
}

}  // namespace

LoadBalancingModel::LoadBalancingModel(LoadBalancingParams params, WeightedGraph graph)
    : params_(params), graph_(std::move(graph)), degrees_(graph_.n(), 0.0) {
  check_params(params_);
  for (std::size_t k = 0; k < n(); ++k) {
    for (double x : graph_.row(k)) degrees_[k] += x;
  }
  weights_ = dispatch_weights(graph_.entries(), degrees_);
}

WeightedGraph LoadBalancingModel::tilde_graph() const {
  std::vector<double> t(weights_);
  const double scale = static_cast<double>(n()) / 16.0;
  for (double& x : t) x *= scale;
  return WeightedGraph(n(), std::move(t));
}

std::vector<Transition> lb_transition_rates(const LoadBalancingModel& model,
                                            std::span<const StateIndex> states,
                                            std::size_t k) {
  if (states.size() != model.n() || k >= model.n()) {
    throw InvalidArgument("state vector does not match the load-balancing model");
  }
  const auto& p = model.params();
  const StateIndex s = states[k];
  if (s > p.capacity) throw InvalidArgument("queue length exceeds K_L");
  std::vector<Transition> out;
  if (s < p.capacity) {
    double a = 0.0;
    for (std::size_t l = 0; l < model.n(); ++l) a += model.weight(k, l) * win_share(states[l], s);
    if (p.lambda * a > 0.0) out.push_back({static_cast<StateIndex>(s + 1), p.lambda * a});
  }
  if (s > 0 && p.mu > 0.0) out.push_back({static_cast<StateIndex>(s - 1), p.mu});
  return out;
}

// ---------------------------------------------------------------------------

LoadBalancingKernel::LoadBalancingKernel(const LoadBalancingModel& model)
    : params_(model.params()), n_(model.n()), weights_(n_ * n_), nbrs_(n_) {
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t l = 0; l < n_; ++l) {
      weights_[k * n_ + l] = model.weight(k, l);
      if (l != k && model.weight(l, k) > 0.0) nbrs_[k].push_back(l);
    }
  }
}

double LoadBalancingKernel::arrival_sum(std::span<const StateIndex> states,
                                        std::size_t k) const {
  const double* w = weights_.data() + k * n_;
  const StateIndex s = states[k];
  double a = 0.0;
  for (std::size_t l = 0; l < n_; ++l) {
    if (w[l] != 0.0) a += w[l] * win_share(states[l], s);
  }
  return a;
}

double LoadBalancingKernel::particle_total(const SystemState& st, std::size_t k) const {
  const StateIndex s = st.states[k];
  double total = 0.0;
  if (s < params_.capacity) total += params_.lambda * std::max(st.aux[k], 0.0);
  if (s > 0) total += params_.mu;
  return total;
}

void LoadBalancingKernel::refresh(SystemState& st) const {
  st.aux.assign(n_, 0.0);
  st.totals.assign(n_, 0.0);
  st.total_rate = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    st.aux[k] = arrival_sum(st.states, k);
    st.totals[k] = particle_total(st, k);
    st.total_rate += st.totals[k];
  }
}

void LoadBalancingKernel::transitions(const SystemState& st, std::size_t k,
                                      std::vector<Transition>& out) const {
  out.clear();
  const StateIndex s = st.states[k];
  if (s < params_.capacity) {
    const double r = params_.lambda * std::max(st.aux[k], 0.0);
    if (r > 0.0) out.push_back({static_cast<StateIndex>(s + 1), r});
  }
  if (s > 0 && params_.mu > 0.0) out.push_back({static_cast<StateIndex>(s - 1), params_.mu});
}

void LoadBalancingKernel::apply(SystemState& st, std::size_t k, StateIndex target) const {
  const StateIndex old = st.states[k];
  if (target > params_.capacity || (target != old + 1 && target + 1 != old)) {
    throw InvariantViolation("load-balancing event must change a queue by one job");
  }
  st.states[k] = target;
  for (std::size_t l : nbrs_[k]) {
    const StateIndex sl = st.states[l];
    st.aux[l] += weights_[l * n_ + k] * (win_share(target, sl) - win_share(old, sl));
    const double fresh = particle_total(st, l);
    st.total_rate += fresh - st.totals[l];
    st.totals[l] = fresh;
  }
  st.aux[k] = arrival_sum(st.states, k);
  const double fresh = particle_total(st, k);
  st.total_rate += fresh - st.totals[k];
  st.totals[k] = fresh;
}

// ---------------------------------------------------------------------------

LoadBalancingDrift::LoadBalancingDrift(const LoadBalancingParams& p, std::size_t gamma,
                                       std::vector<double> kernel)
    : params_(p), gamma_(gamma) {
  check_params(p);
  if (gamma_ == 0) throw InvalidArgument("drift resolution must be >= 1");
  const double gd = static_cast<double>(gamma_);
  std::vector<double> degree(gamma_, 0.0);
  for (std::size_t i = 0; i < gamma_; ++i) {
    for (std::size_t j = 0; j < gamma_; ++j) degree[i] += kernel[i * gamma_ + j];
    degree[i] /= gd;
  }
  weights_ = dispatch_weights(kernel, degree);
  double w_max = 0.0, omega_sq = 0.0;
  for (std::size_t i = 0; i < gamma_; ++i) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < gamma_; ++j) {
      double& w = weights_[i * gamma_ + j];
      sum += w;
      sq += w * w;
      w /= gd;
    }
    w_max = std::max(w_max, sum / gd);
    omega_sq = std::max(omega_sq, sq / gd);
  }
  const double ns = static_cast<double>(p.capacity + 1);
  lipschitz_ = 2.0 * (p.lambda * w_max + p.mu) + 2.0 * p.lambda * std::sqrt(omega_sq * ns);
}

LoadBalancingDrift LoadBalancingDrift::from_graphon(const Graphon& g,
                                                    const LoadBalancingParams& p,
                                                    std::size_t gamma) {
  if (gamma == 0) throw InvalidArgument("drift resolution must be >= 1");
  const double gd = static_cast<double>(gamma);
  std::vector<double> kernel(gamma * gamma);
  for (std::size_t i = 0; i < gamma; ++i) {
    for (std::size_t j = 0; j < gamma; ++j) {
      kernel[i * gamma + j] =
          g(static_cast<double>(i + 1) / gd, static_cast<double>(j + 1) / gd);
    }
  }
  return LoadBalancingDrift(p, gamma, std::move(kernel));
}

LoadBalancingDrift LoadBalancingDrift::from_graph(const WeightedGraph& graph,
                                                  const LoadBalancingParams& p) {
  return LoadBalancingDrift(p, graph.n(), {graph.entries().begin(), graph.entries().end()});
}

void LoadBalancingDrift::evaluate(const OccupancyField& x, OccupancyField& out) const {
  const std::size_t ns = state_count();
  if (x.resolution() != gamma_ || x.state_count() != ns) {
    throw InvalidArgument("field shape does not match the load-balancing drift");
  }
  if (out.resolution() != gamma_ || out.state_count() != ns) {
    out = OccupancyField(gamma_, ns);
  } else {
    std::fill(out.values().begin(), out.values().end(), 0.0);
  }
  // h[j][s] = x_{j,s}/2 + sum_{s'>s} x_{j,s'}
  std::vector<double> h(gamma_ * ns);
  for (std::size_t j = 0; j < gamma_; ++j) {
    double above = 0.0;
    for (std::size_t s = ns; s-- > 0;) {
      h[j * ns + s] = 0.5 * x(j, s) + above;
      above += x(j, s);
    }
  }
  std::vector<double> acc(ns);
  for (std::size_t i = 0; i < gamma_; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const double* w = weights_.data() + i * gamma_;
    for (std::size_t j = 0; j < gamma_; ++j) {
      if (w[j] == 0.0) continue;
      const double* hj = h.data() + j * ns;
      for (std::size_t s = 0; s + 1 < ns; ++s) acc[s] += w[j] * hj[s];
    }
    for (std::size_t s = 0; s < ns; ++s) {
      const double xi = x(i, s);
      if (s + 1 < ns) {
        const double flow = params_.lambda * xi * acc[s];
        out(i, s) -= flow;
        out(i, s + 1) += flow;
      }
      if (s > 0) {
        const double flow = params_.mu * xi;
        out(i, s) -= flow;
        out(i, s - 1) += flow;
      }
    }
  }
}

}  // namespace gmf
