/* C interface of the graphon mean field library. */
#ifndef GMF_GMF_H
#define GMF_GMF_H

#include <stddef.h>
#include <stdint.h>

#if defined(GMF_BUILDING_LIBRARY)
#define GMF_API __attribute__((visibility("default")))
#else
#define GMF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gmf_status {
  GMF_OK = 0,
  GMF_ERR_INVALID_ARGUMENT = 1,
  GMF_ERR_CONFIG = 2,
  GMF_ERR_INVARIANT = 3,
  GMF_ERR_IO = 4,
  GMF_ERR_DOMAIN = 5,
  GMF_ERR_NOT_CONVERGED = 6,
  GMF_ERR_INTERNAL = 99
} gmf_status;

typedef struct gmf_graphon gmf_graphon;
typedef struct gmf_graph gmf_graph;

GMF_API const char* gmf_version(void);
/* Message of the last failed call on this thread ("" if none). */
GMF_API const char* gmf_last_error(void);
GMF_API const char* gmf_status_name(gmf_status status);

/* Graphons: {"kind": "constant"|"triangular_fig1a"|"bike_popularity"|"blockwise", ...} */
GMF_API gmf_status gmf_graphon_from_json(const char* json, gmf_graphon** out);
GMF_API void gmf_graphon_free(gmf_graphon* g);
GMF_API gmf_status gmf_graphon_eval(const gmf_graphon* g, double u, double v, double* out);
GMF_API gmf_status gmf_graphon_info(const gmf_graphon* g, double* lipschitz, size_t* blocks,
                                    double* bound);

/* Graphs */
GMF_API gmf_status gmf_graph_discretize(const gmf_graphon* g, size_t n, gmf_graph** out);
GMF_API gmf_status gmf_graph_sample(const gmf_graphon* g, size_t n, uint64_t seed,
                                    gmf_graph** out);
GMF_API gmf_status gmf_graph_load(const char* path, gmf_graph** out);
GMF_API gmf_status gmf_graph_save(const gmf_graph* graph, const char* path);
GMF_API void gmf_graph_free(gmf_graph* graph);
GMF_API gmf_status gmf_graph_size(const gmf_graph* graph, size_t* n);
/* 0-based indices */
GMF_API gmf_status gmf_graph_entry(const gmf_graph* graph, size_t k, size_t l, double* out);
GMF_API gmf_status gmf_graph_opnorm(const gmf_graph* graph, double* out);
/* ||g - graph|| in the L2 operator norm on an m-grid (m = 0: default grid). */
GMF_API gmf_status gmf_graph_graphon_distance(const gmf_graphon* g, const gmf_graph* graph,
                                              size_t m, double* out);

/* Closed-form bounds */
GMF_API gmf_status gmf_psi_bound(size_t n, double delta, double l_g, size_t k_g, double* out);
GMF_API gmf_status gmf_discretization_error_bound(double l_b, double c_b, size_t k, size_t n,
                                                  double* out);

/* Experiments. config_json is the experiment document; out_dir overrides its
 * "output" entry when non-NULL; threads = 0 keeps the configured count.
 * On success *result receives a JSON summary to release with gmf_string_free. */
GMF_API gmf_status gmf_run(const char* config_json, const char* out_dir, unsigned threads,
                           char** result);
GMF_API gmf_status gmf_sweep(const char* config_json, const char* out_dir, unsigned threads,
                             char** result);
GMF_API gmf_status gmf_check_bounds(const char* config_json, char** result);
GMF_API void gmf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
