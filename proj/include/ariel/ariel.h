/* C interface to the ARIEL simulator. Every call returns an ariel_status;
 * on failure ariel_last_error() describes the problem (per thread). */
#ifndef ARIEL_ARIEL_H
#define ARIEL_ARIEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ARIEL_BUILDING)
#    define ARIEL_API __declspec(dllexport)
#  else
#    define ARIEL_API __declspec(dllimport)
#  endif
#else
#  define ARIEL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ariel_status {
  ARIEL_OK = 0,
  ARIEL_E_ARGUMENT = 1,
  ARIEL_E_PARSE = 2,
  ARIEL_E_STRUCTURE = 3,
  ARIEL_E_CONFIG = 4,
  ARIEL_E_INFEASIBLE = 5,
  ARIEL_E_CALIBRATION = 6,
  ARIEL_E_IO = 7,
  ARIEL_E_FORMAT = 8,
  ARIEL_E_ORDERING = 9,
  ARIEL_E_CONSISTENCY = 10,
  ARIEL_E_RANGE = 11,     /* index out of range */
  ARIEL_E_PARTIAL = 12,   /* some sweep cells or report rows failed */
  ARIEL_E_INTERNAL = 99
} ariel_status;

/* Experiment configuration: base settings, sweep axes, topology list, output dir. */
typedef struct ariel_config ariel_config;
/* Outcome of ariel_run: per-seed series, aggregates and final state. */
typedef struct ariel_result ariel_result;

ARIEL_API const char* ariel_version(void);
ARIEL_API const char* ariel_last_error(void);
ARIEL_API const char* ariel_status_name(ariel_status s);

ARIEL_API ariel_status ariel_config_new(ariel_config** out);
ARIEL_API ariel_status ariel_config_load(const char* path, ariel_config** out);
ARIEL_API ariel_status ariel_config_parse(const char* text, const char* base_dir, ariel_config** out);
ARIEL_API void ariel_config_free(ariel_config* cfg);
/* Sets a base field, e.g. ("reuse_ratio", "75") or ("seeds", "1,2,3"). */
ARIEL_API ariel_status ariel_config_set(ariel_config* cfg, const char* key, const char* value);
/* Copies the text form of a field into buf (NUL-terminated); *needed gets the full length + 1. */
ARIEL_API ariel_status ariel_config_get(const ariel_config* cfg, const char* key, char* buf, size_t len, size_t* needed);
/* Output directory named by the config file; "" when unset. */
ARIEL_API const char* ariel_config_out_dir(const ariel_config* cfg);
ARIEL_API size_t ariel_config_sweep_cells(const ariel_config* cfg);
ARIEL_API size_t ariel_config_topology_count(const ariel_config* cfg);
ARIEL_API ariel_status ariel_config_add_topology(ariel_config* cfg, const char* source);

ARIEL_API ariel_status ariel_run(const ariel_config* cfg, unsigned jobs, ariel_result** out);
ARIEL_API void ariel_result_free(ariel_result* res);
ARIEL_API size_t ariel_result_seed_count(const ariel_result* res);
ARIEL_API ariel_status ariel_result_seed(const ariel_result* res, size_t run, uint64_t* seed, double* flow_bw);
ARIEL_API size_t ariel_result_steps(const ariel_result* res);
/* Across-seed mean of a metric at a step (1-based); has_half_width is 0 for a single seed. */
ARIEL_API ariel_status ariel_result_mean(const ariel_result* res, const char* metric, int64_t step, double* mean,
                                         double* half_width, int* has_half_width);
/* Per-seed value of a metric at a step (1-based). */
ARIEL_API ariel_status ariel_result_value(const ariel_result* res, size_t run, const char* metric, int64_t step,
                                          double* value);
ARIEL_API ariel_status ariel_result_write_csv(const ariel_result* res, const char* path);
ARIEL_API ariel_status ariel_result_write_summary(const ariel_result* res, const char* path);
/* Relation-store snapshot of one seed's run. */
ARIEL_API ariel_status ariel_result_write_snapshot(const ariel_result* res, size_t run, const char* path);
ARIEL_API ariel_status ariel_result_write_te(const ariel_result* res, size_t run, const char* path);

/* Lowest flow bandwidth whose first wave floods a target link (before flow_bw_scale). */
ARIEL_API ariel_status ariel_calibrate(const ariel_config* cfg, uint64_t seed, double* flow_bw);

/* Runs every sweep cell and writes one merged CSV. failed_cells may be NULL.
 * Returns ARIEL_E_PARTIAL when some cells failed; the others are still written. */
ARIEL_API ariel_status ariel_sweep(const ariel_config* cfg, unsigned jobs, const char* csv_path,
                                   size_t* cells, size_t* failed_cells);

/* Runs the config on each listed topology and writes the report CSV.
 * Unloadable topologies are skipped (counted in *skipped, reason in the CSV).
 * *r_defined is 0 when the correlation is undefined. */
ARIEL_API ariel_status ariel_topo_report(const ariel_config* cfg, unsigned jobs, const char* csv_path, double* r,
                                         int* r_defined, size_t* skipped);

#ifdef __cplusplus
}
#endif

#endif
