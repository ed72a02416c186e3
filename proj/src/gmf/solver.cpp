#include "gmf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "gmf/error.hpp"

namespace gmf {

namespace {

constexpr double kSimplexTolerance = 1e-6;
constexpr double kRenormalizeTolerance = 1e-9;

void check_simplex(const OccupancyField& x, double t) {
  for (std::size_t i = 0; i < x.resolution(); ++i) {
    double sum = 0.0;
    double lowest = std::numeric_limits<double>::infinity();
    for (double v : x.row(i)) {
      if (!std::isfinite(v)) {
        throw InvariantViolation("non-finite value in cell " + std::to_string(i + 1) +
                                 " at t=" + std::to_string(t));
      }
      sum += v;
      lowest = std::min(lowest, v);
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance || lowest < -kSimplexTolerance) {
      throw InvariantViolation("cell " + std::to_string(i + 1) + " left the simplex at t=" +
                               std::to_string(t) + " (row sum " + std::to_string(sum) +
                               ", min " + std::to_string(lowest) +
                               "); step too large or rate model inconsistent");
    }
  }
}

OccupancyField guarded_copy(const OccupancyField& x) {
  OccupancyField out = x;
  for (std::size_t i = 0; i < out.resolution(); ++i) {
    auto row = out.row(i);
    double sum = 0.0;
    double lowest = 0.0;
    for (double v : row) {
      sum += v;
      lowest = std::min(lowest, v);
    }
    const double off = std::abs(sum - 1.0);
    if (off > 4.0 * std::numeric_limits<double>::epsilon() && off <= kRenormalizeTolerance &&
        lowest >= -kRenormalizeTolerance) {
      for (double& v : row) v /= sum;
    }
  }
  return out;
}

void axpy(std::vector<double>& out, const std::vector<double>& x, double a,
          const std::vector<double>& k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + a * k[i];
}

}  // namespace

double resolve_step(const SolverConfig& cfg, double lipschitz) {
  if (cfg.gamma == 0) throw InvalidArgument("solver resolution gamma must be >= 1");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
    throw InvalidArgument("t_end must be finite and >= 0");
  }
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("dt must be >= 0");
  const double limit = lipschitz > 0.0 ? 0.5 / lipschitz : std::numeric_limits<double>::infinity();
  if (cfg.dt == 0.0) return std::min(1e-2, 0.25 * (lipschitz > 0.0 ? 1.0 / lipschitz : 1.0));
  if (cfg.dt > limit) {
    throw InvalidArgument("dt=" + std::to_string(cfg.dt) + " exceeds the stability limit " +
                          std::to_string(limit) + " = 0.5/L_F");
  }
  return cfg.dt;
}

std::vector<OccupancyField> solve(const OccupancyField& x0, const FieldDrift& drift,
                                  const SolverConfig& cfg,
                                  std::span<const double> out_times) {
  if (x0.resolution() != drift.resolution() || x0.state_count() != drift.state_count()) {
    throw InvalidArgument("initial field has resolution " + std::to_string(x0.resolution()) +
                          ", drift expects " + std::to_string(drift.resolution()));
  }
  const double dt = resolve_step(cfg, drift.lipschitz_bound());
  for (std::size_t i = 0; i < out_times.size(); ++i) {
    const double t = out_times[i];
    if (!(t >= 0.0) || t > cfg.t_end) throw InvalidArgument("output time outside [0, t_end]");
    if (i > 0 && t < out_times[i - 1]) throw InvalidArgument("output times must be ascending");
  }
  check_simplex(x0, 0.0);

  const std::size_t res = x0.resolution();
  const std::size_t ns = x0.state_count();
  OccupancyField x = x0;
  OccupancyField k1(res, ns), k2(res, ns), k3(res, ns), k4(res, ns), tmp(res, ns);
  std::vector<OccupancyField> out;
  out.reserve(out_times.size());

  double t = 0.0;
  for (double target : out_times) {
    while (t < target) {
      double h = target - t;
      if (h > dt * (1.0 + 1e-9)) h = dt;
      auto& xv = x.values();
      drift.evaluate(x, k1);
      axpy(tmp.values(), xv, 0.5 * h, k1.values());
      drift.evaluate(tmp, k2);
      axpy(tmp.values(), xv, 0.5 * h, k2.values());
      drift.evaluate(tmp, k3);
      axpy(tmp.values(), xv, h, k3.values());
      drift.evaluate(tmp, k4);
      const auto& a = k1.values();
      const auto& b = k2.values();
      const auto& c = k3.values();
      const auto& d = k4.values();
      for (std::size_t i = 0; i < xv.size(); ++i) {
        xv[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
      }
      t = (h == target - t) ? target : t + h;
      check_simplex(x, t);
    }
    out.push_back(guarded_copy(x));
  }
  return out;
}

std::vector<OccupancyField> solve(const OccupancyField& x0, const Graphon& g,
                                  const RateModel& rm, const SolverConfig& cfg,
                                  std::span<const double> out_times) {
  if (x0.resolution() != cfg.gamma) {
    throw InvalidArgument("initial field resolution must equal gamma");
  }
  return solve(x0, PairwiseDrift::from_graphon(rm, g, cfg.gamma), cfg, out_times);
}

std::vector<OccupancyField> solve_from_indicator(std::span<const StateIndex> states,
                                                 const Graphon& g, const RateModel& rm,
                                                 const SolverConfig& cfg,
                                                 std::span<const double> out_times) {
  if (states.empty() || cfg.gamma % states.size() != 0) {
    throw InvalidArgument("gamma=" + std::to_string(cfg.gamma) +
                          " is not a multiple of N=" + std::to_string(states.size()));
  }
  return solve_from_indicator(states, PairwiseDrift::from_graphon(rm, g, cfg.gamma), cfg,
                              out_times);
}

std::vector<OccupancyField> solve_from_indicator(std::span<const StateIndex> states,
                                                 const FieldDrift& drift,
                                                 const SolverConfig& cfg,
                                                 std::span<const double> out_times) {
  if (states.empty() || drift.resolution() % states.size() != 0) {
    throw InvalidArgument("gamma=" + std::to_string(drift.resolution()) +
                          " is not a multiple of N=" + std::to_string(states.size()));
  }
  const auto x0 = OccupancyField::indicator(states, drift.state_count(), drift.resolution());
  return solve(x0, drift, cfg, out_times);
}

void write_ode_csv(const std::filesystem::path& path, std::span<const double> times,
                   std::span<const OccupancyField> fields) {
  if (times.size() != fields.size()) throw InvalidArgument("one field per output time expected");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t,i,u,s,value\n";
  for (std::size_t t = 0; t < times.size(); ++t) {
    const OccupancyField& f = fields[t];
    const double g = static_cast<double>(f.resolution());
    for (std::size_t i = 0; i < f.resolution(); ++i) {
      for (std::size_t s = 0; s < f.state_count(); ++s) {
        out << times[t] << ',' << i + 1 << ',' << static_cast<double>(i + 1) / g << ',' << s
            << ',' << f(i, s) << '\n';
      }
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gmf
