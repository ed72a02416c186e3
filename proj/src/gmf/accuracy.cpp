#include "gmf/accuracy.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "gmf/bounds.hpp"
#include "gmf/error.hpp"
#include "gmf/kernel_norm.hpp"

namespace gmf {

double l2_distance_fields(const OccupancyField& a, const OccupancyField& b) {
  if (a.state_count() != b.state_count()) {
    throw InvalidArgument("fields have different state counts (" +
                          std::to_string(a.state_count()) + " vs " +
                          std::to_string(b.state_count()) + ")");
  }
  // Boundaries i/ra and j/rb compared exactly as i*rb vs j*ra.
  using Wide = unsigned __int128;
  const std::size_t ra = a.resolution();
  const std::size_t rb = b.resolution();
  const std::size_t ns = a.state_count();
  const double scale = static_cast<double>(ra) * static_cast<double>(rb);
  std::size_t i = 0, j = 0;
  Wide prev = 0;
  double sum = 0.0;
  while (i < ra && j < rb) {
    const Wide ea = static_cast<Wide>(i + 1) * rb;
    const Wide eb = static_cast<Wide>(j + 1) * ra;
    const Wide end = ea < eb ? ea : eb;
    const double width = static_cast<double>(end - prev) / scale;
    double cell = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      const double d = a(i, s) - b(j, s);
      cell += d * d;
    }
    sum += cell * width;
    prev = end;
    if (ea == end) ++i;
    if (eb == end) ++j;
  }
  return std::sqrt(sum);
}

double mc_halfwidth(const EnsembleStats& stats, std::size_t t) {
  double var = 0.0;
  for (std::size_t k = 0; k < stats.particles(); ++k) {
    for (std::size_t s = 0; s < stats.states(); ++s) {
      const double p = stats.mean(t, k, s);
      var += p * (1.0 - p);
    }
  }
  return 3.0 * std::sqrt(var / static_cast<double>(stats.runs())) /
         std::sqrt(static_cast<double>(stats.particles()));
}

AccuracyReport error_vs_bound(const EnsembleStats& stats,
                              std::span<const OccupancyField> ode, const Graphon& g,
                              const WeightedGraph& graph, bool stochastic) {
  if (ode.size() != stats.time_grid().size()) {
    throw InvalidArgument("ODE output has " + std::to_string(ode.size()) +
                          " times, ensemble has " + std::to_string(stats.time_grid().size()));
  }
  if (graph.n() != stats.particles()) throw InvalidArgument("graph size differs from ensemble N");
  AccuracyReport rep;
  rep.n = stats.particles();
  rep.r = stats.runs();
  rep.gamma = ode.empty() ? 0 : ode.front().resolution();
  rep.t_grid = stats.time_grid();
  for (std::size_t t = 0; t < ode.size(); ++t) {
    rep.error.push_back(l2_distance_fields(stats.mean_field(t), ode[t]));
    rep.mc_halfwidth.push_back(mc_halfwidth(stats, t));
  }
  rep.distance_term = graph_graphon_distance(g, graph).norm;
  if (stochastic) {
    try {
      rep.psi_term = psi_bound({.n = rep.n,
                                .delta = 2.0 / static_cast<double>(rep.n),
                                .l_g = g.lipschitz(),
                                .k_g = g.block_count()});
    } catch (const DomainError&) {
      rep.psi_term.reset();
    }
  }
  return rep;
}

ScalingFit convergence_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InvalidArgument("a scaling fit needs at least 3 points");
  ScalingFit fit;
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0)) throw InvalidArgument("N must be positive");
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw InvalidArgument("error " + std::to_string(e) + " at N=" + std::to_string(n) +
                            " is not positive; cannot take the logarithm");
    }
    fit.n_values.push_back(n);
    fit.errors.push_back(e);
    sx += std::log(n);
    sy += std::log(e);
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, e] : points) {
    const double dx = std::log(n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("scaling fit needs at least two distinct N");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

nlohmann::json to_json(const AccuracyReport& r) {
  nlohmann::json j = {{"n", r.n},
                      {"r", r.r},
                      {"gamma", r.gamma},
                      {"t_grid", r.t_grid},
                      {"error", r.error},
                      {"mc_halfwidth", r.mc_halfwidth},
                      {"distance_term", r.distance_term}};
  j["psi_term"] = r.psi_term ? nlohmann::json(*r.psi_term) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ScalingFit& f) {
  return {{"n_values", f.n_values},
          {"errors", f.errors},
          {"slope", f.slope},
          {"intercept", f.intercept}};
}

void write_csv(const std::filesystem::path& path, const AccuracyReport& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t,error,mc_halfwidth,distance_term,psi_term\n";
  for (std::size_t t = 0; t < r.t_grid.size(); ++t) {
    out << r.t_grid[t] << ',' << r.error[t] << ',' << r.mc_halfwidth[t] << ','
        << r.distance_term << ',';
    if (r.psi_term) out << *r.psi_term;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_csv(const std::filesystem::path& path, const ScalingFit& f) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "n,error\n";
  for (std::size_t i = 0; i < f.n_values.size(); ++i) {
    out << f.n_values[i] << ',' << f.errors[i] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gmf
