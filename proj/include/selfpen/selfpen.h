/* C interface of the selfpen library. All objects are opaque handles owned by
 * the caller and released with the matching *_free function. Every fallible
 * call returns an sp_status; on failure sp_last_error() describes the cause
 * (thread-local, valid until the next failing call on the same thread).
 * Feature indices crossing this interface are 1-based. */
#ifndef SELFPEN_H
#define SELFPEN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SP_API __declspec(dllexport)
#else
#define SP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sp_status {
    SP_OK = 0,
    SP_ERR_INVALID_ARGUMENT = 1,
    SP_ERR_DIMENSION_MISMATCH = 2,
    SP_ERR_NUMERICAL = 3,
    SP_ERR_IO = 4,
    SP_ERR_PARSE = 5,
    SP_ERR_INTERNAL = 99
} sp_status;

typedef struct sp_dataset sp_dataset;
typedef struct sp_selector sp_selector;
typedef struct sp_selection sp_selection;
typedef struct sp_experiment sp_experiment;
typedef struct sp_validation sp_validation;

SP_API const char* sp_version(void);
SP_API const char* sp_last_error(void);
SP_API const char* sp_status_name(sp_status status);
/* Releases strings returned through char** out-parameters. */
SP_API void sp_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* Synthetic data settings. Enumerations are passed by name:
 * signal in {linear-1, cubic-2, interaction},
 * response in {classification, regression, logistic}. */
typedef struct sp_gen_options {
    size_t n;
    size_t p;
    double rho;
    const char* signal;
    const char* response;
    double flip_prob;
    double noise_sd;
    double link_scale;
    uint64_t seed;
} sp_gen_options;

/* n=200, p=2, rho=0, linear-1, classification, flip 0.1, noise 0.1, link 1, seed 0. */
SP_API void sp_gen_options_init(sp_gen_options* opt);
SP_API sp_status sp_dataset_generate(const sp_gen_options* opt, sp_dataset** out);
SP_API sp_status sp_dataset_read_csv(const char* path, sp_dataset** out);
SP_API sp_status sp_dataset_write_csv(const sp_dataset* d, const char* path);
SP_API sp_status sp_dataset_from_arrays(const double* x_row_major, const double* y, size_t n, size_t p,
                                        sp_dataset** out);
SP_API size_t sp_dataset_n(const sp_dataset* d);
SP_API size_t sp_dataset_p(const sp_dataset* d);
SP_API void sp_dataset_free(sp_dataset* d);

/* ---- selection --------------------------------------------------------- */

/* method is "ml" or "krr". Keys accepted by sp_selector_set:
 * lambda, eps, M, alpha, max_iters, grad_tol, seed, q, calibration_runs,
 * calibration_quantile, calibration_safety, bandwidth. Without eps the
 * threshold is calibrated on label permutations of the input. */
SP_API sp_status sp_selector_new(const char* method, sp_selector** out);
SP_API sp_status sp_selector_set(sp_selector* s, const char* key, const char* value);
SP_API sp_status sp_selector_run(const sp_selector* s, const sp_dataset* d, sp_selection** out);
SP_API void sp_selector_free(sp_selector* s);

/* Writes up to `capacity` 1-based indices; *count receives the full size. */
SP_API sp_status sp_selection_selected(const sp_selection* r, size_t* indices, size_t capacity, size_t* count);
SP_API size_t sp_selection_rounds(const sp_selection* r);
/* Full round log as JSON, including every recorded iterate. */
SP_API sp_status sp_selection_json(const sp_selection* r, char** out);
SP_API void sp_selection_free(sp_selection* r);

/* ---- experiments ------------------------------------------------------- */

/* Names: correlation-2d, correlation-cubic, pure-interaction,
 * main-effect-grid, interaction-grid. Keys accepted by sp_experiment_set:
 * procedure, grid (comma separated), repeats, seed, n, lambda, M, alpha,
 * max_iters, grad_tol, safeguard, eps, calibration_runs,
 * calibration_quantile, calibration_safety, calibration_reweighted_safety,
 * smoother, threads, timing. */
SP_API sp_status sp_experiment_new(const char* name, const char* method, sp_experiment** out);
SP_API sp_status sp_experiment_set(sp_experiment* e, const char* key, const char* value);
SP_API sp_status sp_experiment_run(sp_experiment* e);
/* CSV `name,param,repeats,tpr,fpr,mean_rounds,mean_ms`; needs a prior run. */
SP_API sp_status sp_experiment_metrics_csv(const sp_experiment* e, char** out);
/* One CSV line per repeat. */
SP_API sp_status sp_experiment_raw_csv(const sp_experiment* e, char** out);
/* Exact-recovery fraction of grid point i (1 = S_hat equals the truth). */
SP_API sp_status sp_experiment_exact(const sp_experiment* e, size_t i, double* out);
SP_API size_t sp_experiment_rows(const sp_experiment* e);
SP_API void sp_experiment_free(sp_experiment* e);

/* ---- validation -------------------------------------------------------- */

typedef struct sp_property {
    const char* suite;
    const char* name;
    int passed;
    double measured;
    double tolerance;
    size_t instances;
    const char* detail;
} sp_property;

/* filter: substring of "suite/name", NULL or "" for all. */
SP_API sp_status sp_validation_run(const char* filter, uint64_t seed, sp_validation** out);
SP_API size_t sp_validation_count(const sp_validation* v);
/* Strings in *out stay valid until sp_validation_free. */
SP_API sp_status sp_validation_get(const sp_validation* v, size_t i, sp_property* out);
SP_API void sp_validation_free(sp_validation* v);

typedef struct sp_gradcheck_result {
    size_t evaluations;
    double max_relative_error;
    double tolerance;
    int passed;
} sp_gradcheck_result;

/* target is "ml" or "krr". */
SP_API sp_status sp_gradcheck(const char* target, size_t instances, size_t points, uint64_t seed,
                              sp_gradcheck_result* out);

#ifdef __cplusplus
}
#endif

#endif
