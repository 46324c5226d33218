/* cyvortex C interface.
 *
 * All objects are opaque handles released by their matching *_free call.
 * Functions returning cyv_status report failures through the status and a
 * thread-local message available from cyv_last_error().
 */
#ifndef CYVORTEX_H
#define CYVORTEX_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(CYV_BUILDING_LIBRARY)
#define CYV_API __attribute__((visibility("default")))
#else
#define CYV_API
#endif

typedef enum cyv_status {
  CYV_OK = 0,
  CYV_ERR_INVALID_ARGUMENT = 1,
  CYV_ERR_CONFIG = 2,
  CYV_ERR_RESOLUTION = 3,
  CYV_ERR_OUT_OF_RANGE = 4,
  CYV_ERR_DIVERGED = 5,
  CYV_ERR_NOT_CONVERGED = 6,
  CYV_ERR_KRYLOV_BREAKDOWN = 7,
  CYV_ERR_IO = 8,
  CYV_ERR_SHAPE_MISMATCH = 9,
  CYV_ERR_INTERNAL = 10
} cyv_status;

typedef enum cyv_field {
  CYV_FIELD_W = 0,
  CYV_FIELD_U,
  CYV_FIELD_UBAR,
  CYV_FIELD_S,
  CYV_FIELD_SOURCE,
  CYV_FIELD_LAMBDA,
  CYV_FIELD_PHI_SQ, /* reconstructed fields need a converged solve */
  CYV_FIELD_FTILDE12,
  CYV_FIELD_A0,
  CYV_FIELD_KINETIC,
  CYV_FIELD_ELECTRIC,
  CYV_FIELD_POTENTIAL,
  CYV_FIELD_T00
} cyv_field;

typedef struct cyv_config cyv_config;
typedef struct cyv_solution cyv_solution;
typedef struct cyv_report cyv_report;

typedef struct cyv_solve_stats {
  int converged;
  int iterations;
  double residual_inf;
  double threshold;
  int vortex_number;
  double epsilon1;
  double flux;   /* 0 unless converged */
  double energy; /* 0 unless converged */
} cyv_solve_stats;

CYV_API const char* cyv_version(void);
CYV_API const char* cyv_status_string(cyv_status status);
/* Message of the last failure on the calling thread; empty if none. */
CYV_API const char* cyv_last_error(void);

CYV_API cyv_status cyv_config_from_file(const char* path, cyv_config** out);
CYV_API cyv_status cyv_config_from_json(const char* json, cyv_config** out);
CYV_API void cyv_config_free(cyv_config* config);
/* Resolved configuration with all defaults; release with cyv_string_free. */
CYV_API cyv_status cyv_config_resolved_json(const cyv_config* config, char** out);
CYV_API void cyv_string_free(char* s);

/* Worker threads for the rest of the process (n >= 1). */
CYV_API cyv_status cyv_set_workers(int n);

/* Solves the configured problem. A solve that fails to converge still yields
 * a handle; inspect cyv_solve_stats.converged. */
CYV_API cyv_status cyv_solve(const cyv_config* config, cyv_solution** out);
CYV_API void cyv_solution_free(cyv_solution* solution);
CYV_API cyv_status cyv_solution_shape(const cyv_solution* solution, size_t* n_t, size_t* n_theta);
/* Copies n_t * n_theta values, row-major with t outer. */
CYV_API cyv_status cyv_solution_copy_field(const cyv_solution* solution, cyv_field field, double* buffer,
                                           size_t length);
CYV_API cyv_status cyv_solution_stats(const cyv_solution* solution, cyv_solve_stats* out);
/* Writes up to length entries; *count receives the full trace length. */
CYV_API cyv_status cyv_solution_energy_trace(const cyv_solution* solution, double* buffer, size_t length,
                                             size_t* count);

/* Runs "solve", "verify", "mms" or "decay". The report is produced even when
 * the command fails; only a NULL argument makes this return an error. */
CYV_API cyv_status cyv_run(const char* command, const cyv_config* config, cyv_report** out);
CYV_API int cyv_report_exit_code(const cyv_report* report);
CYV_API const char* cyv_report_summary_json(const cyv_report* report);
CYV_API const char* cyv_report_message(const cyv_report* report);
CYV_API void cyv_report_free(cyv_report* report);

#ifdef __cplusplus
}
#endif

#endif /* CYVORTEX_H */
