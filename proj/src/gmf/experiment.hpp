#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gmf/accuracy.hpp"
#include "gmf/ctmc.hpp"
#include "gmf/dynamics.hpp"
#include "gmf/graphon.hpp"
#include "json.hpp"

namespace gmf {

enum class Sampling { kDeterministic, kStochastic };

/// One experiment, parsed from a JSON document:
///
///   {
///     "model": {"name": "two_state"|"sis"|"load_balancing"|"bike_sharing",
///               "parameters": {...}},
///     "graphon": {"kind": ...},                 // not used by bike_sharing
///     "sampling": {"method": "deterministic"|"stochastic", "seed": 7},
///     "n": 40,  or  "n_list": [10, 20, 40],
///     "r": 2000,
///     "seed": 1,                                // trajectory master seed
///     "gamma": 100,
///     "dt": 0.01,                               // optional, 0 = default
///     "time_grid": {"t_end": 2, "step": 0.1}  or  [0, 0.5, 1],
///     "initial": {"state": 0} | {"states": [...]} | {"pattern": [...]},
///     "output": "out/dir",                      // optional
///     "threads": 1,                             // optional
///     "delta": 0.01                             // optional, check-bounds only
///   }
///
/// Seeds are required; there is no entropy-based default.
struct ExperimentConfig {
  std::string model;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json graphon = nullptr;
  Sampling sampling = Sampling::kDeterministic;
  std::optional<std::uint64_t> graph_seed;
  std::vector<std::size_t> n_values;
  std::uint64_t r = 1;
  std::uint64_t seed = 0;
  std::size_t gamma = 100;
  double dt = 0.0;
  std::vector<double> time_grid;
  nlohmann::json initial = nullptr;
  std::filesystem::path output;
  unsigned threads = 1;
  std::optional<double> delta;
  nlohmann::json source = nullptr;  // the document as given

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Everything needed to simulate and solve one model instance at size n.
struct ModelInstance {
  std::string name;
  nlohmann::json parameters;  // with defaults filled in
  StateSpace states{std::vector<std::string>{"0"}};
  Graphon graphon;
  WeightedGraph graph;
  bool stochastic = false;
  std::shared_ptr<const TransitionKernel> kernel;
  std::shared_ptr<const FieldDrift> drift;  // at the configured gamma
  std::vector<StateIndex> initial;
};

ModelInstance build_model(const ExperimentConfig& cfg, std::size_t n);

struct RunResult {
  std::filesystem::path directory;
  AccuracyReport report;
  nlohmann::json manifest;
};

/// Samples the graph, runs the ensemble and the ODE, and writes graph.bin,
/// ensemble.csv, ode.csv, accuracy.json, accuracy.csv and manifest.json
/// into `out`. Uses cfg.n_values.front().
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct SweepResult {
  std::vector<RunResult> runs;
  ScalingFit fit;
};

/// run_experiment for every n (in subdirectories n_<n>) and a log-log fit of
/// the final-time errors, written to scaling.json and scaling.csv.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Distance bound, large-N conditions and discretization bound for the
/// configured graphon at every n, without simulating.
nlohmann::json check_bounds(const ExperimentConfig& cfg);

// Lowercase hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gmf
