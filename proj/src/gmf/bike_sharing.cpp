#include <algorithm>
#include <cmath>
#include <string>

#include "gmf/error.hpp"
#include "gmf/models.hpp"

namespace gmf {

namespace {

void check_params(const BikeSharingParams& p) {
  for (double v : {p.lambda, p.mu, p.alpha}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("bike sharing rates and alpha must be finite and >= 0");
    }
  }
  if (p.capacity == 0) throw InvalidArgument("station capacity K_B must be >= 1");
  if (p.alpha > static_cast<double>(p.capacity)) {
    throw InvalidArgument("alpha exceeds the station capacity; the fleet cannot be parked");
  }
}

// w_k = (1/N) sum_l G_lk
std::vector<double> column_means(const WeightedGraph& g) {
  const std::size_t n = g.n();
  std::vector<double> w(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t k = 0; k < n; ++k) w[k] += g(l, k);
  }
  for (double& x : w) x /= static_cast<double>(n);
  return w;
}

}  // namespace

BikeSharingModel::BikeSharingModel(BikeSharingParams params, std::size_t n)
    : BikeSharingModel(params, discretize_deterministic(
                                   Graphon::bike_popularity(params.popularity_a,
                                                            params.popularity_b),
                                   n)) {}

BikeSharingModel::BikeSharingModel(BikeSharingParams params, WeightedGraph graph)
    : params_(params),
      graphon_(Graphon::bike_popularity(params.popularity_a, params.popularity_b)),
      graph_(std::move(graph)) {
  check_params(params_);
  fleet_ = static_cast<std::size_t>(
      std::floor(params_.alpha * static_cast<double>(n()) + 1e-9));
  weights_ = column_means(graph_);
}

std::vector<StateIndex> BikeSharingModel::initial_state() const {
  const std::size_t base = fleet_ / n();
  const std::size_t extra = fleet_ % n();
  std::vector<StateIndex> s(n());
  for (std::size_t k = 0; k < n(); ++k) s[k] = static_cast<StateIndex>(base + (k < extra ? 1 : 0));
  return s;
}

std::vector<Transition> bike_transition_rates(const BikeSharingModel& model,
                                              std::span<const StateIndex> states,
                                              std::size_t k) {
  if (states.size() != model.n() || k >= model.n()) {
    throw InvalidArgument("state vector does not match the bike sharing model");
  }
  const auto& p = model.params();
  std::size_t parked = 0;
  for (StateIndex s : states) {
    if (s > p.capacity) throw InvariantViolation("station occupancy exceeds K_B");
    parked += s;
  }
  if (parked > model.fleet()) {
    throw InvariantViolation("more bikes parked (" + std::to_string(parked) +
                             ") than the fleet holds (" + std::to_string(model.fleet()) + ")");
  }
  const double transit = static_cast<double>(model.fleet() - parked);
  std::vector<Transition> out;
  const StateIndex s = states[k];
  if (s > 0 && p.lambda > 0.0) out.push_back({static_cast<StateIndex>(s - 1), p.lambda});
  if (s < p.capacity) {
    const double r = model.station_weights()[k] * p.mu * transit / static_cast<double>(model.n());
    if (r > 0.0) out.push_back({static_cast<StateIndex>(s + 1), r});
  }
  return out;
}

// ---------------------------------------------------------------------------

BikeSharingKernel::BikeSharingKernel(const BikeSharingModel& model)
    : params_(model.params()), fleet_(model.fleet()), weights_(model.station_weights()) {}

void BikeSharingKernel::validate(std::span<const StateIndex> states) const {
  TransitionKernel::validate(states);
  std::size_t parked = 0;
  for (StateIndex s : states) parked += s;
  if (parked > fleet_) {
    throw InvariantViolation("initial configuration parks " + std::to_string(parked) +
                             " bikes but the fleet has " + std::to_string(fleet_));
  }
}

double BikeSharingKernel::travel_intensity(const SystemState& st) const {
  return params_.mu * (static_cast<double>(fleet_) - st.aux[0]) /
         static_cast<double>(weights_.size());
}

void BikeSharingKernel::update_total(SystemState& st) const {
  st.total_rate = params_.lambda * st.aux[1] + travel_intensity(st) * std::max(st.aux[2], 0.0);
}

void BikeSharingKernel::refresh(SystemState& st) const {
  double parked = 0.0, nonempty = 0.0, open_weight = 0.0;
  for (std::size_t k = 0; k < st.states.size(); ++k) {
    const StateIndex s = st.states[k];
    parked += s;
    if (s > 0) nonempty += 1.0;
    if (s < params_.capacity) open_weight += weights_[k];
  }
  st.aux = {parked, nonempty, open_weight};
  st.totals.clear();
  update_total(st);
}

void BikeSharingKernel::transitions(const SystemState& st, std::size_t k,
                                    std::vector<Transition>& out) const {
  out.clear();
  const StateIndex s = st.states[k];
  if (s > 0 && params_.lambda > 0.0) out.push_back({static_cast<StateIndex>(s - 1), params_.lambda});
  if (s < params_.capacity) {
    const double r = weights_[k] * travel_intensity(st);
    if (r > 0.0) out.push_back({static_cast<StateIndex>(s + 1), r});
  }
}

void BikeSharingKernel::apply(SystemState& st, std::size_t k, StateIndex target) const {
  const StateIndex old = st.states[k];
  if (target > params_.capacity || (target != old + 1 && target + 1 != old)) {
    throw InvariantViolation("bike event must move exactly one bike");
  }
  st.states[k] = target;
  st.aux[0] += static_cast<double>(target) - static_cast<double>(old);
  if (st.aux[0] < 0.0 || st.aux[0] > static_cast<double>(fleet_)) {
    throw InvariantViolation("bikes in transit left [0, M] at station " + std::to_string(k + 1));
  }
  if (old == 0) st.aux[1] += 1.0;
  if (target == 0) st.aux[1] -= 1.0;
  if (old == params_.capacity) st.aux[2] += weights_[k];
  if (target == params_.capacity) st.aux[2] -= weights_[k];
  update_total(st);
}

bool BikeSharingKernel::select(const SystemState& st, rng::Engine& eng,
                               std::vector<Transition>&, std::size_t& k,
                               StateIndex& target) const {
  const std::size_t n = st.states.size();
  double u = rng::uniform01(eng) * st.total_rate;
  const double departures = params_.lambda * st.aux[1];
  if (u < departures) {
    // uniform among nonempty stations
    auto j = static_cast<std::size_t>(u / params_.lambda);
    for (std::size_t i = 0; i < n; ++i) {
      if (st.states[i] == 0) continue;
      k = i;
      if (j-- == 0) break;
    }
    if (st.states[k] == 0) return false;
    target = static_cast<StateIndex>(st.states[k] - 1);
    return true;
  }
  const double ti = travel_intensity(st);
  if (!(ti > 0.0)) return false;
  u = (u - departures) / ti;
  std::size_t last = n;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (st.states[i] >= params_.capacity || weights_[i] <= 0.0) continue;
    last = i;
    acc += weights_[i];
    if (u < acc) break;
  }
  if (last == n) return false;
  k = last;
  target = static_cast<StateIndex>(st.states[k] + 1);
  return true;
}

// ---------------------------------------------------------------------------

BikeSharingDrift::BikeSharingDrift(const BikeSharingParams& p, std::vector<double> weights,
                                   double fleet_per_station)
    : params_(p), weights_(std::move(weights)), fleet_per_station_(fleet_per_station) {
  check_params(p);
  if (weights_.empty()) throw InvalidArgument("drift resolution must be >= 1");
  const double w_max = *std::max_element(weights_.begin(), weights_.end());
  const double k = static_cast<double>(p.capacity);
  double sq = 0.0;
  for (std::size_t s = 0; s <= p.capacity; ++s) sq += static_cast<double>(s * s);
  lipschitz_ = 2.0 * (p.lambda + w_max * p.mu * std::max(fleet_per_station_, k)) +
               2.0 * w_max * p.mu * std::sqrt(sq);
}

BikeSharingDrift BikeSharingDrift::from_graphon(const Graphon& g, const BikeSharingParams& p,
                                                std::size_t gamma, double fleet_per_station) {
  if (gamma == 0) throw InvalidArgument("drift resolution must be >= 1");
  const double gd = static_cast<double>(gamma);
  std::vector<double> w(gamma, 0.0);
  for (std::size_t i = 0; i < gamma; ++i) {
    for (std::size_t j = 0; j < gamma; ++j) {
      w[i] += g(static_cast<double>(j + 1) / gd, static_cast<double>(i + 1) / gd);
    }
    w[i] /= gd;
  }
  return BikeSharingDrift(p, std::move(w), fleet_per_station > 0.0 ? fleet_per_station : p.alpha);
}

BikeSharingDrift BikeSharingDrift::from_model(const BikeSharingModel& model) {
  return BikeSharingDrift(model.params(), model.station_weights(),
                          static_cast<double>(model.fleet()) / static_cast<double>(model.n()));
}

void BikeSharingDrift::evaluate(const OccupancyField& x, OccupancyField& out) const {
  const std::size_t res = weights_.size();
  const std::size_t ns = state_count();
  if (x.resolution() != res || x.state_count() != ns) {
    throw InvalidArgument("field shape does not match the bike sharing drift");
  }
  if (out.resolution() != res || out.state_count() != ns) {
    out = OccupancyField(res, ns);
  } else {
    std::fill(out.values().begin(), out.values().end(), 0.0);
  }
  double parked = 0.0;
  for (std::size_t i = 0; i < res; ++i) {
    for (std::size_t s = 1; s < ns; ++s) parked += static_cast<double>(s) * x(i, s);
  }
  const double transit = fleet_per_station_ - parked / static_cast<double>(res);
  if (transit < -1e-9) {
    throw InvariantViolation("negative in-transit bike mass " + std::to_string(transit));
  }
  for (std::size_t i = 0; i < res; ++i) {
    const double arrival = weights_[i] * params_.mu * transit;
    for (std::size_t s = 0; s < ns; ++s) {
      const double xi = x(i, s);
      if (s + 1 < ns) {
        const double flow = arrival * xi;
        out(i, s) -= flow;
        out(i, s + 1) += flow;
      }
      if (s > 0) {
        const double flow = params_.lambda * xi;
        out(i, s) -= flow;
        out(i, s - 1) += flow;
      }
    }
  }
}

}  // namespace gmf
