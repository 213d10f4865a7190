/*
 * C interface of the two-fluid verification toolkit.
 *
 * Every function returns a tf_status. On failure the message is available
 * from tf_last_error() on the calling thread until the next call into the
 * library. Strings handed out through char** parameters are owned by the
 * caller and must be released with tf_string_free().
 */
#ifndef TWOFLUID_H
#define TWOFLUID_H

#include <stddef.h>

#if defined(_WIN32)
#define TF_API __declspec(dllexport)
#else
#define TF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tf_status {
    TF_OK = 0,
    TF_INVALID_ARGUMENT = 1,
    TF_CONSTRAINT = 2,     /* parameter outside the admissible set */
    TF_CONVERGENCE = 3,
    TF_ADMISSIBILITY = 4,  /* state left the region where the fraction map is defined */
    TF_QUADRATURE = 5,
    TF_BRANCH = 6,
    TF_IO = 7,
    TF_NUMERICAL = 8,
    TF_INTERNAL = 9
} tf_status;

typedef struct tf_params tf_params;
typedef struct tf_sim tf_sim;

TF_API const char* tf_version(void);
TF_API const char* tf_last_error(void);
TF_API const char* tf_status_name(tf_status s);
TF_API void tf_string_free(char* s);

/* 0 selects the hardware concurrency. */
TF_API tf_status tf_set_threads(int n);

/* ---- parameters -------------------------------------------------------- */

TF_API tf_status tf_params_create(tf_params** out); /* symmetric defaults */
/* Reads `key = value` lines; unknown keys are an error. */
TF_API tf_status tf_params_load(const char* path, tf_params** out);
TF_API tf_status tf_params_set(tf_params* p, const char* key, double value);
TF_API tf_status tf_params_get(const tf_params* p, const char* key, double* value);
TF_API tf_status tf_params_validate(const tf_params* p);
TF_API void tf_params_destroy(tf_params* p);

/* ---- reports (JSON documents carry "schema": 1) ------------------------ */

TF_API tf_status tf_equilibrium_json(const tf_params* p, char** json);

/* CSV: k, re_lambda1..4, im_lambda1..4, band, degenerate, expansion_err1..4 */
TF_API tf_status tf_spectrum_csv(const tf_params* p, double k_min, double k_max, int count, int log_spacing,
                                 char** csv);

/*
 * Green's function entry (i, j), 1-based in the (n+, m+, n-, m-) block order.
 * envelopes: comma-separated list such as "R4,H:2:1:2" or "D:1.5:1.5,H:2:1:2"
 * (H takes time exponent, spatial exponent, N); NULL picks the default for
 * the entry. kernel_csv has columns r, t, value; report is JSON.
 */
TF_API tf_status tf_greens_report(const tf_params* p, int i, int j, const double* t, size_t nt,
                                  double r_max_factor, const char* envelopes, char** kernel_csv, char** report,
                                  int* pass);

/* Convolution case by name (I1..I3, K1..K7, N12_log, N1, K4_false) or
 * "log_obstruction". */
TF_API tf_status tf_convolve_report(const tf_params* p, const char* case_name, const double* t, size_t nt,
                                    char** report, int* pass);

/* ---- simulation ---------------------------------------------------------- */

/* Gaussian momentum blob of width `width` and amplitude eps on [-L, L)^3. */
TF_API tf_status tf_sim_create(const tf_params* p, int n, double L, double eps, double width, int nonlinear,
                               tf_sim** out);
TF_API void tf_sim_destroy(tf_sim* s);
TF_API tf_status tf_sim_step(tf_sim* s, double dt);
TF_API tf_status tf_sim_time(const tf_sim* s, double* t);
TF_API tf_status tf_sim_dt_max(const tf_sim* s, double* dt);
/* Wrap horizon (L - r_support) / c of the initial blob. */
TF_API tf_status tf_sim_horizon(const tf_sim* s, double* horizon);
TF_API tf_status tf_sim_csv_header(char** line);
TF_API tf_status tf_sim_csv_row(const tf_sim* s, char** line);
/* Little-endian float64: n, L, t, then n+, m+ (x, y, z), n-, m- (x, y, z). */
TF_API tf_status tf_sim_write_dump(const tf_sim* s, const char* path);

/* ---- certification -------------------------------------------------------- */

/* criterion 0 runs all twelve. */
TF_API tf_status tf_certify(const tf_params* p, int criterion, double tol_scale, char** report, int* fail_count);

#ifdef __cplusplus
}
#endif

#endif
