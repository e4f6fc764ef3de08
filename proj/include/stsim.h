/* Copyright (c) 2026 The stsim authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the spectrum trading simulator. Opaque handles, integer
 * status codes; the last error message is kept per thread and owned by
 * the library.
 */

#ifndef STSIM_H
#define STSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define STSIM_API __declspec(dllexport)
#else
#define STSIM_API __attribute__((visibility("default")))
#endif

typedef enum st_status {
  ST_OK = 0,
  ST_ERR_IO = 1,
  ST_ERR_PARSE = 2,
  ST_ERR_INVALID = 3,
  ST_ERR_RUNTIME = 4
} st_status;

typedef struct st_topology st_topology;
typedef struct st_experiment st_experiment;

STSIM_API const char* st_version(void);

/* Message for the most recent failing call on this thread. */
STSIM_API const char* st_last_error(void);

/* --- topology ------------------------------------------------------- */

STSIM_API st_status st_topology_load(const char* path, st_topology** out);
STSIM_API void st_topology_free(st_topology* topo);
STSIM_API int st_topology_node_count(const st_topology* topo);
STSIM_API int st_topology_link_count(const st_topology* topo);
/* Returns a negative value on an unknown link id. */
STSIM_API double st_topology_normalized_length(const st_topology* topo,
                                               int link_id);

/* --- experiment ----------------------------------------------------- */

/* config_path: JSON run configuration (see the README for the schema). */
STSIM_API st_status st_experiment_create(const char* config_path,
                                         st_experiment** out);
STSIM_API void st_experiment_free(st_experiment* exp);

STSIM_API st_status st_experiment_set_seed(st_experiment* exp, uint64_t seed);
/* sweep: "fs" or "mu" */
STSIM_API st_status st_experiment_set_sweep(st_experiment* exp,
                                            const char* sweep);
/* mode: "st", "nonst", or "both" */
STSIM_API st_status st_experiment_set_mode(st_experiment* exp,
                                           const char* mode);

STSIM_API st_status st_experiment_run(st_experiment* exp);

/* Writes report.csv and/or report.json into out_dir. */
STSIM_API st_status st_experiment_write_reports(const st_experiment* exp,
                                                const char* out_dir,
                                                int write_csv, int write_json);

typedef struct st_point_summary {
  double sweep_value;
  double mean_improvement_pct;
  double min_improvement_pct;
  double max_improvement_pct;
  int feasible_replications;
  int replications;
} st_point_summary;

/* Valid after a successful st_experiment_run. */
STSIM_API int st_experiment_point_count(const st_experiment* exp);
STSIM_API st_status st_experiment_point_summary(const st_experiment* exp,
                                                int index,
                                                st_point_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* STSIM_H */
