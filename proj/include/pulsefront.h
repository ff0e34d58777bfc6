#ifndef PULSEFRONT_H
#define PULSEFRONT_H

/* C interface of the pulsefront library. Every function returns PF_OK or one of the error codes
 * below; pf_last_error() then holds a message for the calling thread. Handles are opaque and are
 * released with the matching *_free function. Strings returned by accessors belong to the handle
 * and stay valid until it is freed. */

#include <stddef.h>

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  PF_OK = 0,
  PF_ERR_INVALID_ARGUMENT = 1,
  PF_ERR_CONFIG = 2,
  PF_ERR_GRID_MISMATCH = 3,
  PF_ERR_BOUNDARY_POLICY = 4,
  PF_ERR_NEWTON_DIVERGENCE = 5,
  PF_ERR_WINDOW_TOO_NARROW = 6,
  PF_ERR_NOT_BRACKETED = 7,
  PF_ERR_FIT_WINDOW_EMPTY = 8,
  PF_ERR_OUT_OF_RANGE = 9,
  PF_ERR_CFL_VIOLATION = 10,
  PF_ERR_NAN_DETECTED = 11,
  PF_ERR_NO_CONVERGENCE = 12,
  PF_ERR_PRECONDITION = 13,
  PF_ERR_IO = 14,
  PF_ERR_INTERNAL = 99
};

typedef struct pf_config pf_config;
typedef struct pf_report pf_report;
typedef struct pf_field pf_field;
typedef struct pf_table pf_table;

PF_API const char* pf_version(void);
PF_API const char* pf_last_error(void);
PF_API const char* pf_error_name(int code);
PF_API int pf_set_threads(int n);

/* Configuration */
PF_API int pf_config_default(pf_config** out);
PF_API int pf_config_parse(const char* json_text, pf_config** out);
PF_API int pf_config_load(const char* path, pf_config** out);
PF_API int pf_config_smoke(const pf_config* cfg, pf_config** out);
PF_API const char* pf_config_canonical(const pf_config* cfg);
PF_API const char* pf_config_digest(const pf_config* cfg);
PF_API const char* pf_config_output_dir(const pf_config* cfg);
PF_API const char* pf_config_default_text(void);
PF_API void pf_config_free(pf_config* cfg);

/* Reports */
PF_API int pf_report_passed(const pf_report* r);
PF_API size_t pf_report_checks(const pf_report* r);
PF_API size_t pf_report_failures(const pf_report* r);
/* status: 0 pass, 1 fail, 2 skipped; measured may be NaN for skipped checks */
PF_API int pf_report_check(const pf_report* r, size_t i, const char** name, double* measured, int* status);
PF_API const char* pf_report_id(const pf_report* r);
PF_API const char* pf_report_csv(const pf_report* r);
PF_API const char* pf_report_summary(const pf_report* r);
PF_API double pf_report_seconds(const pf_report* r);
PF_API void pf_report_free(pf_report* r);

/* Fields: binary dumps with a JSON sidecar, and CSV slices */
PF_API int pf_field_read(const char* path, pf_field** out);
PF_API int pf_field_write(const pf_field* f, const char* path, const char* sidecar_json);
/* fixed holds node indices either for every axis or for the other axes only */
PF_API int pf_field_write_csv_slice(const pf_field* f, const char* path, int axis, const int* fixed, size_t n_fixed);
PF_API int pf_field_write_csv_all(const pf_field* f, const char* path);
PF_API int pf_field_dim(const pf_field* f);
PF_API int pf_field_points(const pf_field* f, int axis);
PF_API size_t pf_field_size(const pf_field* f);
PF_API double pf_field_time(const pf_field* f);
PF_API const double* pf_field_values(const pf_field* f);
PF_API const char* pf_field_describe(const pf_field* f);
PF_API void pf_field_free(pf_field* f);

/* Column tables (named columns of doubles), written as CSV */
PF_API size_t pf_table_columns(const pf_table* t);
PF_API size_t pf_table_rows(const pf_table* t);
PF_API const char* pf_table_name(const pf_table* t, size_t column);
PF_API const double* pf_table_column(const pf_table* t, size_t column);
PF_API int pf_table_write_csv(const pf_table* t, const char* path);
PF_API void pf_table_free(pf_table* t);

/* Operations. Output handles may be NULL when not wanted. */

/* Pulsating front at a polar angle in degrees; the profile is the strip field. *speed may be NULL. */
PF_API int pf_run_front(const pf_config* cfg, double angle_deg, pf_report** report, pf_field** profile,
                        double* speed);
/* Surface checks plus a table x, phi, psi, h along a line. */
PF_API int pf_run_surface(const pf_config* cfg, pf_report** report, pf_table** line);
/* Supersolution scan and certificate; the field is the residual on the verification box. */
PF_API int pf_run_verify_super(const pf_config* cfg, pf_report** report, pf_field** residual);
/* init: "sub", "super" or "file" (then init_field is required). The field is the final window state
 * and the table holds the period index and the change over each period. */
PF_API int pf_run_evolve(const pf_config* cfg, const char* init, const pf_field* init_field, pf_report** report,
                         pf_field** state, pf_table** deltas);
/* which: "pulsating", "2.18", "2.19", "2.20" or "all". One report per experiment run, in order. */
PF_API int pf_run_campaign(const pf_config* cfg, const char* which, pf_report*** reports, size_t* count);
PF_API void pf_reports_free(pf_report** reports, size_t count);
/* Discrete comparison principle on random ordered pairs. */
PF_API int pf_run_comparison(const pf_config* cfg, int pairs, int steps, unsigned long long seed,
                             pf_report** report);
/* Reaction hypotheses on the configured sample. */
PF_API int pf_run_hypotheses(const pf_config* cfg, pf_report** report);

#ifdef __cplusplus
}
#endif

#endif
