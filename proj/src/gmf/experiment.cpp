#include "gmf/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gmf/bounds.hpp"
#include "gmf/error.hpp"
#include "gmf/models.hpp"
#include "gmf/solver.hpp"

#ifndef GMF_VERSION
#define GMF_VERSION "unknown"
#endif

namespace gmf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Integer JSON value >= 0, whether parsed as signed or unsigned.
bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

std::size_t count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!is_count(obj[key])) {
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  }
  return obj[key].get<std::size_t>();
}

std::vector<double> parse_time_grid(const json& doc) {
  std::vector<double> grid;
  if (doc.is_array()) {
    for (const auto& t : doc) {
      if (!t.is_number()) throw ConfigError("time_grid entries must be numbers");
      grid.push_back(t.get<double>());
    }
  } else if (doc.is_object()) {
    const double t_end = number(doc, "t_end", -1.0);
    const double step = number(doc, "step", -1.0);
    if (!(t_end >= 0.0) || !(step > 0.0)) {
      throw ConfigError("time_grid needs t_end >= 0 and step > 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(t_end / step));
    for (std::size_t i = 0; i <= steps; ++i) grid.push_back(static_cast<double>(i) * step);
    grid.back() = t_end;
  } else {
    throw ConfigError("time_grid must be a list of times or {t_end, step}");
  }
  if (grid.empty()) throw ConfigError("time_grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || (i > 0 && grid[i] <= grid[i - 1])) {
      throw ConfigError("time_grid must be strictly ascending and >= 0");
    }
  }
  return grid;
}

std::vector<StateIndex> parse_initial(const json& doc, std::size_t n, std::size_t ns,
                                      std::vector<StateIndex> fallback) {
  if (doc.is_null()) return fallback;
  auto state = [ns](const json& v) {
    if (!is_count(v) || v.get<std::size_t>() >= ns) {
      throw ConfigError("initial state must be an integer in [0, " + std::to_string(ns) + ")");
    }
    return static_cast<StateIndex>(v.get<std::size_t>());
  };
  if (!doc.is_object()) throw ConfigError("'initial' must be an object");
  if (doc.contains("state")) return std::vector<StateIndex>(n, state(doc["state"]));
  if (doc.contains("states")) {
    const auto& list = doc["states"];
    if (!list.is_array() || list.size() != n) {
      throw ConfigError("'initial.states' must list one state per particle");
    }
    std::vector<StateIndex> out;
    for (const auto& v : list) out.push_back(state(v));
    return out;
  }
  if (doc.contains("pattern")) {
    const auto& list = doc["pattern"];
    if (!list.is_array() || list.empty()) throw ConfigError("'initial.pattern' must be a non-empty list");
    std::vector<StateIndex> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = state(list[k * list.size() / n]);
    return out;
  }
  throw ConfigError("'initial' needs one of 'state', 'states', 'pattern'");
}

std::string hex(const unsigned char* data, std::size_t len) {
  std::ostringstream os;
  for (std::size_t i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(data[i]);
  }
  return os.str();
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

json config_json(const ExperimentConfig& cfg, std::size_t n, const ModelInstance* m) {
  json j = {{"model", cfg.model},
            {"parameters", m ? m->parameters : cfg.parameters},
            {"graphon", m ? m->graphon.spec() : cfg.graphon},
            {"sampling", cfg.sampling == Sampling::kStochastic ? "stochastic" : "deterministic"},
            {"n", n},
            {"r", cfg.r},
            {"seed", cfg.seed},
            {"gamma", cfg.gamma},
            {"dt", cfg.dt},
            {"time_grid", cfg.time_grid},
            {"initial", cfg.initial}};
  j["graph_seed"] = cfg.graph_seed ? json(*cfg.graph_seed) : json(nullptr);
  return j;
}

// Writes manifest.json listing `files`; compares against a previous manifest
// with the same config if one is present.
json write_manifest(const fs::path& dir, const json& config,
                    const std::vector<std::string>& files, const json& timings) {
  const fs::path path = dir / "manifest.json";
  json previous = nullptr;
  if (fs::exists(path)) {
    try {
      std::ifstream in(path);
      previous = json::parse(in);
    } catch (const json::exception&) {
      previous = nullptr;
    }
  }
  json entries = json::array();
  for (const auto& name : files) {
    entries.push_back({{"name", name},
                       {"sha256", sha256_file(dir / name)},
                       {"bytes", fs::file_size(dir / name)}});
  }
  json manifest = {{"version", GMF_VERSION},
                   {"config", config},
                   {"seeds", {{"trajectories", config.value("seed", json(nullptr))},
                              {"graph", config.value("graph_seed", json(nullptr))}}},
                   {"files", entries},
                   {"wall_time_s", timings}};
  if (previous.is_object() && previous.contains("config") && previous["config"] == config &&
      previous.contains("files")) {
    json changed = json::array();
    for (const auto& e : entries) {
      bool same = false;
      for (const auto& p : previous["files"]) {
        if (p.value("name", "") == e["name"]) same = p.value("sha256", "") == e["sha256"];
      }
      if (!same) changed.push_back(e["name"]);
    }
    manifest["previous_run"] = {{"compared", true},
                                {"identical", changed.empty()},
                                {"changed", changed}};
  } else {
    manifest["previous_run"] = {{"compared", false}};
  }
  write_json(path, manifest);
  return manifest;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig cfg;
  cfg.source = doc;
  if (!doc.contains("model")) throw ConfigError("config needs a 'model' entry");
  const json& model = doc["model"];
  if (model.is_string()) {
    cfg.model = model.get<std::string>();
  } else if (model.is_object() && model.contains("name") && model["name"].is_string()) {
    cfg.model = model["name"].get<std::string>();
    if (model.contains("parameters")) {
      if (!model["parameters"].is_object()) throw ConfigError("model parameters must be an object");
      cfg.parameters = model["parameters"];
    }
  } else {
    throw ConfigError("'model' must be a name or {name, parameters}");
  }
  static const std::vector<std::string> known{"two_state", "sis", "load_balancing",
                                              "bike_sharing"};
  if (std::find(known.begin(), known.end(), cfg.model) == known.end()) {
    throw ConfigError("unknown model '" + cfg.model + "'");
  }
  if (doc.contains("graphon")) cfg.graphon = doc["graphon"];

  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    if (!s.is_object()) throw ConfigError("'sampling' must be an object");
    const std::string method = s.value("method", "deterministic");
    if (method == "deterministic") {
      cfg.sampling = Sampling::kDeterministic;
    } else if (method == "stochastic") {
      cfg.sampling = Sampling::kStochastic;
    } else {
      throw ConfigError("unknown sampling method '" + method + "'");
    }
    if (s.contains("seed")) {
      if (!is_count(s["seed"])) throw ConfigError("sampling seed must be an unsigned integer");
      cfg.graph_seed = s["seed"].get<std::uint64_t>();
    }
  }
  if (cfg.sampling == Sampling::kStochastic && !cfg.graph_seed) {
    throw ConfigError("stochastic sampling needs 'sampling.seed'");
  }

  if (doc.contains("n_list")) {
    if (!doc["n_list"].is_array()) throw ConfigError("'n_list' must be a list");
    for (const auto& v : doc["n_list"]) {
      if (!is_count(v)) throw ConfigError("'n_list' entries must be positive integers");
      cfg.n_values.push_back(v.get<std::size_t>());
    }
  } else if (doc.contains("n")) {
    cfg.n_values.push_back(count(doc, "n", 0));
  }
  if (cfg.n_values.empty()) throw ConfigError("config needs 'n' or 'n_list'");
  for (std::size_t n : cfg.n_values) {
    if (n == 0) throw ConfigError("n must be >= 1");
  }

  cfg.r = count(doc, "r", 0);
  if (cfg.r == 0) throw ConfigError("config needs 'r' >= 1");
  if (!doc.contains("seed") || !is_count(doc["seed"])) {
    throw ConfigError("config needs an unsigned integer 'seed'");
  }
  cfg.seed = doc["seed"].get<std::uint64_t>();
  cfg.gamma = count(doc, "gamma", 100);
  if (cfg.gamma == 0) throw ConfigError("gamma must be >= 1");
  cfg.dt = number(doc, "dt", 0.0);
  if (cfg.dt < 0.0) throw ConfigError("dt must be >= 0");
  if (!doc.contains("time_grid")) throw ConfigError("config needs a 'time_grid'");
  cfg.time_grid = parse_time_grid(doc["time_grid"]);
  if (doc.contains("initial")) cfg.initial = doc["initial"];
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("'output' must be a path string");
    cfg.output = doc["output"].get<std::string>();
  }
  cfg.threads = static_cast<unsigned>(std::max<std::size_t>(1, count(doc, "threads", 1)));
  if (doc.contains("delta")) cfg.delta = number(doc, "delta", 0.0);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

ModelInstance build_model(const ExperimentConfig& cfg, std::size_t n) {
  const json& p = cfg.parameters;
  auto sample = [&](const Graphon& g) {
    if (cfg.sampling == Sampling::kStochastic) return sample_stochastic(g, n, *cfg.graph_seed);
    return discretize_deterministic(g, n);
  };
  try {
    if (cfg.model == "two_state" || cfg.model == "sis") {
      Graphon g = cfg.graphon.is_null() ? Graphon::constant(1.0) : Graphon::from_json(cfg.graphon);
      const bool two = cfg.model == "two_state";
      const double a = number(p, two ? "a" : "beta", 1.0);
      const double b = number(p, two ? "b" : "gamma", 1.0);
      const RateModel rm = two ? RateModel::two_state(a, b) : RateModel::sis(a, b);
      const json params = two ? json{{"a", a}, {"b", b}} : json{{"beta", a}, {"gamma", b}};
      WeightedGraph graph = sample(g);
      auto kernel = std::make_shared<PairwiseKernel>(rm, graph);
      auto drift = std::make_shared<PairwiseDrift>(PairwiseDrift::from_graphon(rm, g, cfg.gamma));
      auto init = parse_initial(cfg.initial, n, rm.state_count(),
                                std::vector<StateIndex>(n, 0));
      return ModelInstance{cfg.model, params, rm.states, g, graph,
                           cfg.sampling == Sampling::kStochastic, kernel, drift, init};
    }
    if (cfg.model == "load_balancing") {
      LoadBalancingParams lp;
      lp.lambda = number(p, "lambda", lp.lambda);
      lp.mu = number(p, "mu", lp.mu);
      lp.capacity = count(p, "capacity", lp.capacity);
      Graphon g = cfg.graphon.is_null() ? Graphon::triangular() : Graphon::from_json(cfg.graphon);
      LoadBalancingModel model(lp, sample(g));
      auto kernel = std::make_shared<LoadBalancingKernel>(model);
      auto drift = std::make_shared<LoadBalancingDrift>(
          LoadBalancingDrift::from_graphon(g, lp, cfg.gamma));
      auto init = parse_initial(cfg.initial, n, lp.capacity + 1, std::vector<StateIndex>(n, 0));
      json params = {{"lambda", lp.lambda}, {"mu", lp.mu}, {"capacity", lp.capacity}};
      return ModelInstance{cfg.model, params, model.states(), g, model.graph(),
                           cfg.sampling == Sampling::kStochastic, kernel, drift, init};
    }
    // bike_sharing
    if (cfg.sampling == Sampling::kStochastic) {
      throw ConfigError("bike_sharing uses deterministic sampling (its graphon is not symmetric)");
    }
    BikeSharingParams bp;
    bp.lambda = number(p, "lambda", bp.lambda);
    bp.mu = number(p, "mu", bp.mu);
    bp.capacity = count(p, "capacity", bp.capacity);
    bp.alpha = number(p, "alpha", bp.alpha);
    bp.popularity_a = number(p, "popularity_a", bp.popularity_a);
    bp.popularity_b = number(p, "popularity_b", bp.popularity_b);
    BikeSharingModel model(bp, n);
    auto kernel = std::make_shared<BikeSharingKernel>(model);
    auto drift = std::make_shared<BikeSharingDrift>(
        BikeSharingDrift::from_graphon(model.graphon(), bp, cfg.gamma));
    auto init = parse_initial(cfg.initial, n, bp.capacity + 1, model.initial_state());
    json params = {{"lambda", bp.lambda},         {"mu", bp.mu},
                   {"capacity", bp.capacity},     {"alpha", bp.alpha},
                   {"popularity_a", bp.popularity_a}, {"popularity_b", bp.popularity_b},
                   {"fleet", model.fleet()}};
    return ModelInstance{cfg.model, params, model.states(), model.graphon(), model.graph(),
                         false, kernel, drift, init};
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid model setup: ") + e.what());
  }
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out) {
  const auto t_total = std::chrono::steady_clock::now();
  const std::size_t n = cfg.n_values.front();
  json timings = json::object();

  auto t0 = std::chrono::steady_clock::now();
  ModelInstance m = build_model(cfg, n);
  timings["build"] = seconds_since(t0);

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  }

  m.graph.save(out / "graph.bin");

  t0 = std::chrono::steady_clock::now();
  EnsembleStats stats =
      ensemble_mean(cfg.r, m.initial, *m.kernel, cfg.time_grid, cfg.seed, cfg.threads);
  timings["ensemble"] = seconds_since(t0);
  stats.write_csv(out / "ensemble.csv");

  t0 = std::chrono::steady_clock::now();
  const SolverConfig scfg{.gamma = cfg.gamma, .dt = cfg.dt, .t_end = cfg.time_grid.back()};
  const bool homogeneous =
      std::all_of(m.initial.begin(), m.initial.end(),
                  [&](StateIndex s) { return s == m.initial.front(); });
  std::vector<OccupancyField> ode;
  try {
    if (cfg.gamma % n == 0) {
      ode = solve_from_indicator(m.initial, *m.drift, scfg, cfg.time_grid);
    } else if (homogeneous) {
      std::vector<double> dist(m.states.size(), 0.0);
      dist[m.initial.front()] = 1.0;
      ode = solve(OccupancyField::uniform(cfg.gamma, dist), *m.drift, scfg, cfg.time_grid);
    } else {
      throw ConfigError("gamma=" + std::to_string(cfg.gamma) + " is not a multiple of n=" +
                        std::to_string(n) + "; a heterogeneous initial state cannot be embedded");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver setup: ") + e.what());
  }
  timings["ode"] = seconds_since(t0);
  write_ode_csv(out / "ode.csv", cfg.time_grid, ode);

  t0 = std::chrono::steady_clock::now();
  AccuracyReport report = error_vs_bound(stats, ode, m.graphon, m.graph, m.stochastic);
  timings["accuracy"] = seconds_since(t0);
  json rj = to_json(report);
  rj["model"] = m.name;
  rj["parameters"] = m.parameters;
  write_json(out / "accuracy.json", rj);
  write_csv(out / "accuracy.csv", report);
  timings["total"] = seconds_since(t_total);

  json manifest = write_manifest(
      out, config_json(cfg, n, &m),
      {"graph.bin", "ensemble.csv", "ode.csv", "accuracy.json", "accuracy.csv"}, timings);
  return RunResult{out, std::move(report), std::move(manifest)};
}

SweepResult run_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.n_values.size() < 3) {
    throw ConfigError("a sweep needs at least 3 values of n (got " +
                      std::to_string(cfg.n_values.size()) + ")");
  }
  const auto t_total = std::chrono::steady_clock::now();
  SweepResult result;
  std::vector<std::pair<double, double>> points;
  json runs = json::array();
  for (std::size_t n : cfg.n_values) {
    ExperimentConfig one = cfg;
    one.n_values = {n};
    RunResult r = run_experiment(one, out / ("n_" + std::to_string(n)));
    const double err = r.report.error.back();
    points.emplace_back(static_cast<double>(n), err);
    json entry = {{"n", n},
                  {"error", err},
                  {"mc_halfwidth", r.report.mc_halfwidth.back()},
                  {"distance_term", r.report.distance_term}};
    entry["psi_term"] = r.report.psi_term ? json(*r.report.psi_term) : json(nullptr);
    runs.push_back(entry);
    result.runs.push_back(std::move(r));
  }
  try {
    result.fit = convergence_slope(points);
  } catch (const InvalidArgument& e) {
    throw InvariantViolation(std::string("scaling fit failed: ") + e.what());
  }
  json doc = to_json(result.fit);
  doc["final_time"] = cfg.time_grid.back();
  doc["runs"] = runs;
  write_json(out / "scaling.json", doc);
  write_csv(out / "scaling.csv", result.fit);
  json config = config_json(cfg, 0, nullptr);
  config.erase("n");
  config["n_list"] = cfg.n_values;
  write_manifest(out, config, {"scaling.json", "scaling.csv"},
                 {{"total", seconds_since(t_total)}});
  return result;
}

json check_bounds(const ExperimentConfig& cfg) {
  Graphon g = Graphon::triangular();
  if (cfg.model == "bike_sharing") {
    g = Graphon::bike_popularity(number(cfg.parameters, "popularity_a", 1.0),
                                 number(cfg.parameters, "popularity_b", 0.5));
  } else if (!cfg.graphon.is_null()) {
    g = Graphon::from_json(cfg.graphon);
  } else if (cfg.model != "load_balancing") {
    g = Graphon::constant(1.0);
  }
  json doc = {{"graphon", g.spec()},
              {"lipschitz", g.lipschitz()},
              {"blocks", g.block_count()},
              {"bound", g.bound()},
              {"symmetric", g.symmetric()}};
  json results = json::array();
  for (std::size_t n : cfg.n_values) {
    const double delta = cfg.delta.value_or(2.0 / static_cast<double>(n));
    json entry = {{"n", n}, {"delta", delta}};
    try {
      entry["psi"] = psi_bound({.n = n, .delta = delta, .l_g = g.lipschitz(), .k_g = g.block_count()});
    } catch (const DomainError& e) {
      entry["psi"] = nullptr;
      entry["psi_error"] = e.what();
    }
    try {
      const LargeEnoughReport le = large_enough_check(g, n, delta);
      entry["large_enough"] = {{"width", {{"lhs", le.width_lhs}, {"rhs", le.width_rhs}, {"ok", le.width_ok}}},
                               {"degree", {{"lhs", le.degree_lhs}, {"rhs", le.degree_rhs}, {"ok", le.degree_ok}}},
                               {"tail", {{"lhs", le.tail_lhs}, {"rhs", le.tail_rhs}, {"ok", le.tail_ok}}},
                               {"large_enough", le.large_enough}};
    } catch (const DomainError& e) {
      entry["large_enough"] = nullptr;
      entry["large_enough_error"] = e.what();
    }
    try {
      entry["discretization_error_bound"] =
          discretization_error_bound(g.lipschitz(), g.bound(), g.block_count() - 1, n);
    } catch (const DomainError& e) {
      entry["discretization_error_bound"] = nullptr;
      entry["discretization_error"] = e.what();
    }
    results.push_back(entry);
  }
  doc["results"] = results;
  return doc;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  return hex(digest, len);
}

}  // namespace gmf
