#include "gmf/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <string>
#include <thread>

#include "gmf/error.hpp"

namespace gmf {

void TransitionKernel::validate(std::span<const StateIndex> states) const {
  if (states.size() != particle_count()) {
    throw InvariantViolation("configuration has " + std::to_string(states.size()) +
                             " particles, kernel expects " +
                             std::to_string(particle_count()));
  }
  for (StateIndex s : states) {
    if (s >= state_count()) throw InvariantViolation("particle state index out of range");
  }
}

// ---------------------------------------------------------------------------
// PairwiseKernel

PairwiseKernel::PairwiseKernel(RateModel rm, WeightedGraph graph)
    : rm_(std::move(rm)), graph_(std::move(graph)) {
  const std::size_t n = graph_.n();
  const std::size_t ns = rm_.state_count();
  uni_.assign(n * ns * ns, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k + 1) / static_cast<double>(n);
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t b = 0; b < ns; ++b) {
        const double r = rm_.uni_rate(u, static_cast<StateIndex>(a), static_cast<StateIndex>(b));
        if (!(r >= 0.0) || !std::isfinite(r)) {
          throw InvalidArgument("unilateral rate must be finite and >= 0");
        }
        uni_[(k * ns + a) * ns + b] = r;
      }
    }
  }
  in_nbrs_.resize(n);
  if (rm_.pair) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        if (l != k && graph_(l, k) > 0.0) in_nbrs_[k].push_back(l);
      }
    }
  }
}

double PairwiseKernel::pair_term(std::size_t k, std::size_t l, StateIndex from,
                                 StateIndex to, StateIndex partner) const {
  const double g = graph_(k, l);
  if (g == 0.0) return 0.0;
  const double n = static_cast<double>(graph_.n());
  return rm_.pair_rate(static_cast<double>(k + 1) / n, static_cast<double>(l + 1) / n,
                       from, to, partner) * g / n;
}

double PairwiseKernel::particle_total(const SystemState& st, std::size_t k) const {
  const std::size_t ns = rm_.state_count();
  const StateIndex a = st.states[k];
  const double* pk = st.aux.data() + k * ns;
  const double* uk = uni_.data() + (k * ns + a) * ns;
  double total = 0.0;
  for (std::size_t b = 0; b < ns; ++b) {
    if (b == a) continue;
    total += uk[b] + std::max(pk[b], 0.0);
  }
  return total;
}

void PairwiseKernel::rebuild_particle(SystemState& st, std::size_t k) const {
  const std::size_t ns = rm_.state_count();
  double* pk = st.aux.data() + k * ns;
  std::fill(pk, pk + ns, 0.0);
  if (!rm_.pair) return;
  const StateIndex a = st.states[k];
  for (std::size_t l = 0; l < graph_.n(); ++l) {
    if (graph_(k, l) == 0.0) continue;
    for (std::size_t b = 0; b < ns; ++b) {
      if (b == a) continue;
      pk[b] += pair_term(k, l, a, static_cast<StateIndex>(b), st.states[l]);
    }
  }
}

void PairwiseKernel::refresh(SystemState& st) const {
  const std::size_t n = graph_.n();
  st.aux.assign(n * rm_.state_count(), 0.0);
  st.totals.assign(n, 0.0);
  st.total_rate = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    rebuild_particle(st, k);
    st.totals[k] = particle_total(st, k);
    st.total_rate += st.totals[k];
  }
}

void PairwiseKernel::transitions(const SystemState& st, std::size_t k,
                                 std::vector<Transition>& out) const {
  out.clear();
  const std::size_t ns = rm_.state_count();
  const StateIndex a = st.states[k];
  const double* pk = st.aux.data() + k * ns;
  const double* uk = uni_.data() + (k * ns + a) * ns;
  for (std::size_t b = 0; b < ns; ++b) {
    if (b == a) continue;
    const double r = uk[b] + std::max(pk[b], 0.0);
    if (r > 0.0) out.push_back({static_cast<StateIndex>(b), r});
  }
}

void PairwiseKernel::apply(SystemState& st, std::size_t k, StateIndex target) const {
  const std::size_t ns = rm_.state_count();
  const StateIndex old = st.states[k];
  st.states[k] = target;
  for (std::size_t l : in_nbrs_[k]) {
    double* pl = st.aux.data() + l * ns;
    const StateIndex sl = st.states[l];
    for (std::size_t b = 0; b < ns; ++b) {
      if (b == sl) continue;
      const auto to = static_cast<StateIndex>(b);
      pl[b] += pair_term(l, k, sl, to, target) - pair_term(l, k, sl, to, old);
    }
    const double fresh = particle_total(st, l);
    st.total_rate += fresh - st.totals[l];
    st.totals[l] = fresh;
  }
  rebuild_particle(st, k);
  const double fresh = particle_total(st, k);
  st.total_rate += fresh - st.totals[k];
  st.totals[k] = fresh;
}

// ---------------------------------------------------------------------------
// Simulation

bool TransitionKernel::select(const SystemState& st, rng::Engine& eng,
                              std::vector<Transition>& scratch, std::size_t& k,
                              StateIndex& target) const {
  const double u = rng::uniform01(eng) * st.total_rate;
  const std::size_t n = st.totals.size();
  std::size_t chosen = n;
  std::size_t last_positive = n;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (st.totals[i] <= 0.0) continue;
    last_positive = i;
    acc += st.totals[i];
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  if (chosen == n) chosen = last_positive;  // rounding at the upper end
  if (chosen == n) return false;
  transitions(st, chosen, scratch);
  double sum = 0.0;
  for (const Transition& t : scratch) sum += t.rate;
  if (!(sum > 0.0)) return false;
  double pick = rng::uniform01(eng) * sum;
  std::size_t which = scratch.size() - 1;
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    if (pick < scratch[i].rate) {
      which = i;
      break;
    }
    pick -= scratch[i].rate;
  }
  k = chosen;
  target = scratch[which].target;
  return true;
}

SystemState make_state(const TransitionKernel& kernel,
                       std::vector<StateIndex> initial) {
  kernel.validate(initial);
  SystemState st;
  st.states = std::move(initial);
  kernel.refresh(st);
  return st;
}

namespace {

// Draws and applies the next event, refreshing stale caches once.
// Returns false if nothing is enabled.
bool select_and_apply(SystemState& st, const TransitionKernel& kernel,
                      rng::Engine& eng, std::vector<Transition>& buf,
                      StepEvent& ev) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (!(st.total_rate > 0.0)) {
      kernel.refresh(st);
      if (!(st.total_rate > 0.0)) return false;
    }
    std::size_t k = 0;
    StateIndex to = 0;
    if (kernel.select(st, eng, buf, k, to)) {
      ev.particle = k;
      ev.from = st.states[k];
      ev.to = to;
      kernel.apply(st, k, to);
      ++st.events;
      return true;
    }
    kernel.refresh(st);
  }
  return false;
}

void check_caches(SystemState& st, const TransitionKernel& kernel) {
  const std::vector<double> cached = st.totals;
  const double cached_total = st.total_rate;
  kernel.refresh(st);
  const double scale = st.total_rate / static_cast<double>(std::max<std::size_t>(1, cached.size()));
  for (std::size_t k = 0; k < cached.size(); ++k) {
    const double fresh = st.totals[k];
    if (std::abs(cached[k] - fresh) > 1e-9 * std::max(std::abs(fresh), scale)) {
      throw InvariantViolation("cached rate of particle " + std::to_string(k + 1) +
                               " drifted from its recomputed value");
    }
  }
  if (std::abs(cached_total - st.total_rate) > 1e-9 * std::max(st.total_rate, 1e-300)) {
    throw InvariantViolation("cached total rate drifted from its recomputed value");
  }
}

}  // namespace

StepEvent step_gillespie(SystemState& st, const TransitionKernel& kernel,
                         rng::Engine& eng) {
  StepEvent ev;
  if (!(st.total_rate > 0.0)) {
    kernel.refresh(st);
    if (!(st.total_rate > 0.0)) {
      ev.absorbed = true;
      return ev;
    }
  }
  const double dt = rng::exponential(eng, st.total_rate);
  std::vector<Transition> buf;
  if (!select_and_apply(st, kernel, eng, buf, ev)) {
    ev.absorbed = true;
    return ev;
  }
  st.time += dt;
  ev.holding_time = dt;
  if (st.events % kRefreshInterval == 0) check_caches(st, kernel);
  return ev;
}

void run_trajectory(
    std::span<const StateIndex> initial, const TransitionKernel& kernel,
    std::span<const double> time_grid, std::uint64_t seed,
    std::uint64_t trajectory_index,
    const std::function<void(std::size_t, std::span<const StateIndex>)>& observe) {
  for (std::size_t i = 1; i < time_grid.size(); ++i) {
    if (time_grid[i] < time_grid[i - 1]) throw InvalidArgument("time grid must be ascending");
  }
  SystemState st = make_state(kernel, {initial.begin(), initial.end()});
  auto eng = rng::stream(seed, trajectory_index);
  std::vector<Transition> buf;
  std::size_t next = 0;
  StepEvent ev;
  while (next < time_grid.size()) {
    if (!(st.total_rate > 0.0)) {
      kernel.refresh(st);
      if (!(st.total_rate > 0.0)) break;
    }
    const double t_next = st.time + rng::exponential(eng, st.total_rate);
    while (next < time_grid.size() && time_grid[next] < t_next) observe(next++, st.states);
    if (next == time_grid.size()) return;
    if (!select_and_apply(st, kernel, eng, buf, ev)) break;
    st.time = t_next;
    if (st.events % kRefreshInterval == 0) check_caches(st, kernel);
  }
  while (next < time_grid.size()) observe(next++, st.states);  // absorbed
}

std::vector<std::vector<StateIndex>> simulate_trajectory(
    std::span<const StateIndex> initial, const TransitionKernel& kernel,
    std::span<const double> time_grid, std::uint64_t seed,
    std::uint64_t trajectory_index) {
  std::vector<std::vector<StateIndex>> snaps(time_grid.size());
  run_trajectory(initial, kernel, time_grid, seed, trajectory_index,
                 [&snaps](std::size_t t, std::span<const StateIndex> states) {
                   snaps[t].assign(states.begin(), states.end());
                 });
  return snaps;
}

// ---------------------------------------------------------------------------
// Ensembles

EnsembleStats::EnsembleStats(std::vector<double> time_grid, std::size_t particles,
                             std::size_t states, std::uint64_t runs)
    : time_grid_(std::move(time_grid)),
      particles_(particles),
      states_(states),
      runs_(runs),
      counts_(time_grid_.size() * particles * states, 0) {}

OccupancyField EnsembleStats::mean_field(std::size_t t) const {
  OccupancyField f(particles_, states_);
  for (std::size_t k = 0; k < particles_; ++k) {
    for (std::size_t s = 0; s < states_; ++s) f(k, s) = mean(t, k, s);
  }
  return f;
}

std::vector<OccupancyField> EnsembleStats::mean_fields() const {
  std::vector<OccupancyField> out;
  out.reserve(time_grid_.size());
  for (std::size_t t = 0; t < time_grid_.size(); ++t) out.push_back(mean_field(t));
  return out;
}

void EnsembleStats::merge(const EnsembleStats& other) {
  if (other.counts_.size() != counts_.size() || other.time_grid_ != time_grid_) {
    throw InvalidArgument("cannot merge ensembles of different shapes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  runs_ += other.runs_;
}

void EnsembleStats::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t,k,s,count,mean\n";
  for (std::size_t t = 0; t < time_grid_.size(); ++t) {
    for (std::size_t k = 0; k < particles_; ++k) {
      for (std::size_t s = 0; s < states_; ++s) {
        out << time_grid_[t] << ',' << k + 1 << ',' << s << ',' << count(t, k, s) << ','
            << mean(t, k, s) << '\n';
      }
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

EnsembleStats ensemble_mean(std::uint64_t runs, std::span<const StateIndex> initial,
                            const TransitionKernel& kernel,
                            std::span<const double> time_grid, std::uint64_t seed,
                            unsigned threads) {
  if (runs == 0) throw InvalidArgument("ensemble needs at least one run");
  kernel.validate(initial);
  const std::vector<double> grid(time_grid.begin(), time_grid.end());
  const std::size_t n = kernel.particle_count();
  const std::size_t ns = kernel.state_count();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                          std::min<std::uint64_t>(runs, 1024))));

  std::vector<EnsembleStats> partial;
  for (unsigned w = 0; w < threads; ++w) {
    partial.emplace_back(grid, n, ns, (runs - w + threads - 1) / threads);
  }
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned w) {
    try {
      EnsembleStats& acc = partial[w];
      for (std::uint64_t r = w; r < runs; r += threads) {
        run_trajectory(initial, kernel, grid, seed, r,
                       [&acc](std::size_t t, std::span<const StateIndex> states) {
                         for (std::size_t k = 0; k < states.size(); ++k) {
                           ++acc.count(t, k, states[k]);
                         }
                       });
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  EnsembleStats total(grid, n, ns, 0);
  for (const auto& p : partial) total.merge(p);
  return total;
}

DegreeStats degree_stats(const WeightedGraph& graph, const Graphon* g) {
  const std::size_t n = graph.n();
  const double nd = static_cast<double>(n);
  DegreeStats d;
  d.degree.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (double x : graph.row(k)) sum += x;
    d.degree[k] = sum;
    if (sum == 0.0) d.isolated.push_back(k);
  }
  d.min_degree = *std::min_element(d.degree.begin(), d.degree.end());
  double total = 0.0;
  for (double x : d.degree) total += x;
  d.mean_degree = total / nd;

  d.expected.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (g) {
      double e = 0.0;
      const double u = static_cast<double>(k + 1) / nd;
      for (std::size_t l = 0; l < n; ++l) e += (*g)(u, static_cast<double>(l + 1) / nd);
      d.expected[k] = e;
    } else {
      d.expected[k] = d.mean_degree;
    }
  }
  d.gamma.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double e = d.expected[k];
    d.gamma[k] = e > 0.0 ? std::sqrt(3.0 * std::log(nd) / e)
                         : std::numeric_limits<double>::infinity();
    if (d.degree[k] < (1.0 - d.gamma[k]) * e) ++d.chernoff_failures;
  }
  d.chernoff_ok = d.chernoff_failures == 0;
  return d;
}

}  // namespace gmf
