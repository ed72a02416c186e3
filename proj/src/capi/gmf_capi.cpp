#include "gmf/gmf.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "gmf/bounds.hpp"
#include "gmf/error.hpp"
#include "gmf/experiment.hpp"
#include "gmf/graphon.hpp"
#include "gmf/kernel_norm.hpp"

struct gmf_graphon {
  gmf::Graphon value;
};

struct gmf_graph {
  gmf::WeightedGraph value;
};

namespace {

thread_local std::string last_error;

gmf_status fail(gmf_status status, const char* what) {
  last_error = what;
  return status;
}

template <typename F>
gmf_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return GMF_OK;
  } catch (const gmf::Error& e) {
    return fail(static_cast<gmf_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(GMF_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GMF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GMF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GMF_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gmf::ExperimentConfig parse_config(const char* text, const char* out_dir, unsigned threads) {
  if (!text) throw gmf::InvalidArgument("config text is NULL");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw gmf::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  auto cfg = gmf::ExperimentConfig::from_json(doc);
  if (out_dir) cfg.output = out_dir;
  if (threads > 0) cfg.threads = threads;
  if (cfg.output.empty()) throw gmf::ConfigError("no output directory given");
  return cfg;
}

#define GMF_REQUIRE(ptr)                                                     \
  do {                                                                       \
    if (!(ptr)) return fail(GMF_ERR_INVALID_ARGUMENT, #ptr " must not be NULL"); \
  } while (0)

}  // namespace

extern "C" {

const char* gmf_version(void) { return GMF_VERSION; }

const char* gmf_last_error(void) { return last_error.c_str(); }

const char* gmf_status_name(gmf_status status) {
  switch (status) {
    case GMF_OK: return "ok";
    case GMF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GMF_ERR_CONFIG: return "config error";
    case GMF_ERR_INVARIANT: return "invariant violation";
    case GMF_ERR_IO: return "io error";
    case GMF_ERR_DOMAIN: return "domain error";
    case GMF_ERR_NOT_CONVERGED: return "not converged";
    case GMF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

gmf_status gmf_graphon_from_json(const char* json, gmf_graphon** out) {
  GMF_REQUIRE(json);
  GMF_REQUIRE(out);
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw gmf::ConfigError(std::string("graphon is not valid JSON: ") + e.what());
    }
    *out = new gmf_graphon{gmf::Graphon::from_json(doc)};
  });
}

void gmf_graphon_free(gmf_graphon* g) { delete g; }

gmf_status gmf_graphon_eval(const gmf_graphon* g, double u, double v, double* out) {
  GMF_REQUIRE(g);
  GMF_REQUIRE(out);
  if (!(u > 0.0 && u <= 1.0 && v > 0.0 && v <= 1.0)) {
    return fail(GMF_ERR_INVALID_ARGUMENT, "graphon arguments must lie in (0, 1]");
  }
  return guarded([&] { *out = g->value(u, v); });
}

gmf_status gmf_graphon_info(const gmf_graphon* g, double* lipschitz, size_t* blocks,
                            double* bound) {
  GMF_REQUIRE(g);
  if (lipschitz) *lipschitz = g->value.lipschitz();
  if (blocks) *blocks = g->value.block_count();
  if (bound) *bound = g->value.bound();
  last_error.clear();
  return GMF_OK;
}

gmf_status gmf_graph_discretize(const gmf_graphon* g, size_t n, gmf_graph** out) {
  GMF_REQUIRE(g);
  GMF_REQUIRE(out);
  return guarded([&] { *out = new gmf_graph{gmf::discretize_deterministic(g->value, n)}; });
}

gmf_status gmf_graph_sample(const gmf_graphon* g, size_t n, uint64_t seed, gmf_graph** out) {
  GMF_REQUIRE(g);
  GMF_REQUIRE(out);
  return guarded([&] { *out = new gmf_graph{gmf::sample_stochastic(g->value, n, seed)}; });
}

gmf_status gmf_graph_load(const char* path, gmf_graph** out) {
  GMF_REQUIRE(path);
  GMF_REQUIRE(out);
  return guarded([&] { *out = new gmf_graph{gmf::WeightedGraph::load(path)}; });
}

gmf_status gmf_graph_save(const gmf_graph* graph, const char* path) {
  GMF_REQUIRE(graph);
  GMF_REQUIRE(path);
  return guarded([&] { graph->value.save(path); });
}

void gmf_graph_free(gmf_graph* graph) { delete graph; }

gmf_status gmf_graph_size(const gmf_graph* graph, size_t* n) {
  GMF_REQUIRE(graph);
  GMF_REQUIRE(n);
  *n = graph->value.n();
  last_error.clear();
  return GMF_OK;
}

gmf_status gmf_graph_entry(const gmf_graph* graph, size_t k, size_t l, double* out) {
  GMF_REQUIRE(graph);
  GMF_REQUIRE(out);
  if (k >= graph->value.n() || l >= graph->value.n()) {
    return fail(GMF_ERR_INVALID_ARGUMENT, "graph index out of range");
  }
  *out = graph->value(k, l);
  last_error.clear();
  return GMF_OK;
}

gmf_status gmf_graph_opnorm(const gmf_graph* graph, double* out) {
  GMF_REQUIRE(graph);
  GMF_REQUIRE(out);
  return guarded([&] { *out = gmf::l2_opnorm(graph->value).norm; });
}

gmf_status gmf_graph_graphon_distance(const gmf_graphon* g, const gmf_graph* graph, size_t m,
                                      double* out) {
  GMF_REQUIRE(g);
  GMF_REQUIRE(graph);
  GMF_REQUIRE(out);
  return guarded([&] { *out = gmf::graph_graphon_distance(g->value, graph->value, m).norm; });
}

gmf_status gmf_psi_bound(size_t n, double delta, double l_g, size_t k_g, double* out) {
  GMF_REQUIRE(out);
  return guarded([&] { *out = gmf::psi_bound({.n = n, .delta = delta, .l_g = l_g, .k_g = k_g}); });
}

gmf_status gmf_discretization_error_bound(double l_b, double c_b, size_t k, size_t n,
                                          double* out) {
  GMF_REQUIRE(out);
  return guarded([&] { *out = gmf::discretization_error_bound(l_b, c_b, k, n); });
}

gmf_status gmf_run(const char* config_json, const char* out_dir, unsigned threads,
                   char** result) {
  GMF_REQUIRE(result);
  return guarded([&] {
    const auto cfg = parse_config(config_json, out_dir, threads);
    const auto r = gmf::run_experiment(cfg, cfg.output);
    const nlohmann::json summary = {{"directory", r.directory.string()},
                                    {"report", gmf::to_json(r.report)},
                                    {"manifest", r.manifest}};
    *result = copy_string(summary.dump(2));
  });
}

gmf_status gmf_sweep(const char* config_json, const char* out_dir, unsigned threads,
                     char** result) {
  GMF_REQUIRE(result);
  return guarded([&] {
    const auto cfg = parse_config(config_json, out_dir, threads);
    const auto s = gmf::run_sweep(cfg, cfg.output);
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : s.runs) {
      runs.push_back({{"directory", r.directory.string()}, {"report", gmf::to_json(r.report)}});
    }
    const nlohmann::json summary = {{"directory", cfg.output.string()},
                                    {"fit", gmf::to_json(s.fit)},
                                    {"runs", runs}};
    *result = copy_string(summary.dump(2));
  });
}

gmf_status gmf_check_bounds(const char* config_json, char** result) {
  GMF_REQUIRE(config_json);
  GMF_REQUIRE(result);
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw gmf::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    *result = copy_string(gmf::check_bounds(gmf::ExperimentConfig::from_json(doc)).dump(2));
  });
}

void gmf_string_free(char* s) { std::free(s); }

}  // extern "C"
