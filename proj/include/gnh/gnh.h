/* C interface to the gnh trajectory optimization library.
 *
 * Every function returns a gnh_status. On failure the message is available from
 * gnh_last_error() on the calling thread until the next call into the library.
 * Objects are opaque and owned by the caller once returned; release them with the
 * matching *_free function. Configs and problems are passed as JSON text.
 */
#ifndef GNH_H
#define GNH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GNH_API __declspec(dllexport)
#else
#define GNH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  GNH_OK = 0,
  GNH_ERR_INVALID_ARGUMENT = 1,
  GNH_ERR_IO = 2,
  GNH_ERR_CONFIG = 3,
  GNH_ERR_NUMERICAL = 4,
  GNH_ERR_INTERNAL = 5
} gnh_status;

typedef struct gnh_chain gnh_chain;
typedef struct gnh_report gnh_report;

GNH_API const char* gnh_version(void);
GNH_API const char* gnh_last_error(void);
GNH_API const char* gnh_status_name(gnh_status status);

/* Chains. `path` is a chain file or "builtin:<name>". */
GNH_API gnh_status gnh_chain_load(const char* path, gnh_chain** out);
GNH_API void gnh_chain_free(gnh_chain* chain);
GNH_API int gnh_chain_dof(const gnh_chain* chain);
/* World position of a named frame at configuration q (length dof). */
GNH_API gnh_status gnh_chain_frame_position(const gnh_chain* chain, const char* frame, const double* q, size_t n,
                                            double out[3]);
/* Configuration-space inertia matrix, row-major n x n. */
GNH_API gnh_status gnh_chain_inertia_matrix(const gnh_chain* chain, const double* q, size_t n, double* out);

/* Experiments. `base_dir` resolves relative file paths inside the config (NULL: working
 * directory). An empty or NULL config selects all defaults. */
GNH_API gnh_status gnh_run_convergence(const char* config_json, const char* base_dir, gnh_report** out);
GNH_API gnh_status gnh_run_energy_sweep(const char* config_json, const char* base_dir, gnh_report** out);
GNH_API gnh_status gnh_run_optimize(const char* problem_json, const char* base_dir, gnh_report** out);
GNH_API gnh_status gnh_run_check(const char* config_json, const char* base_dir, gnh_report** out);

/* "csv" or "json". A convergence CSV also writes <stem>_slopes.csv next to `path`. */
GNH_API gnh_status gnh_report_write(const gnh_report* report, const char* path, const char* format);
GNH_API gnh_status gnh_report_to_json(const gnh_report* report, char** out);
GNH_API gnh_status gnh_report_summary(const gnh_report* report, char** out);
/* 1 when an optimize run converged or every self-check passed; 1 for the experiments. */
GNH_API int gnh_report_ok(const gnh_report* report);
GNH_API void gnh_report_free(gnh_report* report);

GNH_API void gnh_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
