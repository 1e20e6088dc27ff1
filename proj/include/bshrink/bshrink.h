#ifndef BSHRINK_BSHRINK_H
#define BSHRINK_BSHRINK_H

/*
 * C interface to the shrinkage Gibbs sampler for linear regression with a
 * block of missing covariates.
 *
 * Every fallible call returns a bshrink_status; on failure a message is
 * available from bshrink_last_error() until the next call on the same
 * thread. Matrices are row-major, doubles are IEEE-754 binary64. Objects
 * are opaque and released with their *_free function (NULL is accepted).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BSHRINK_BUILDING)
#    define BSHRINK_API __declspec(dllexport)
#  else
#    define BSHRINK_API __declspec(dllimport)
#  endif
#else
#  define BSHRINK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bshrink_status {
  BSHRINK_OK = 0,
  BSHRINK_E_INVALID_PARAMETER = 1,
  BSHRINK_E_NOT_POSITIVE_DEFINITE = 2,
  BSHRINK_E_DOF_TOO_SMALL = 3,
  BSHRINK_E_SINGULAR_DESIGN = 4,
  BSHRINK_E_DEGENERATE_BETA = 5,
  BSHRINK_E_DEGENERATE_COLUMN = 6,
  BSHRINK_E_NON_FINITE = 7,
  BSHRINK_E_DIMENSION = 8,
  BSHRINK_E_CHAIN = 9,
  BSHRINK_E_EMPTY_GRID = 10,
  BSHRINK_E_PATTERN_DIMENSION = 11,
  BSHRINK_E_CONFIG = 12,
  BSHRINK_E_IO = 13,
  BSHRINK_E_NULL_ARGUMENT = 14,
  BSHRINK_E_INTERNAL = 15
} bshrink_status;

typedef enum bshrink_method {
  BSHRINK_VANILLA = 0,
  BSHRINK_HIERBETAS = 1,
  BSHRINK_EBBETAS = 2,
  BSHRINK_EBSIGMAX = 3,
  BSHRINK_EBBOTH = 4
} bshrink_method;

typedef enum bshrink_noise {
  BSHRINK_NOISE_STDDEV = 0,  /* beta0 + x'beta + sigma * eps */
  BSHRINK_NOISE_VARIANCE = 1 /* beta0 + x'beta + sigma^2 * eps */
} bshrink_noise;

typedef struct bshrink_dataset bshrink_dataset;
typedef struct bshrink_chain bshrink_chain;

typedef struct bshrink_chain_options {
  uint64_t seed;
  uint64_t stream;
  long burn_in;
  long stored_draws;
  long ewig_block; /* K: EWiG update period */
  int per_gene;    /* nonzero: per-column psi_j, nu_j */
} bshrink_chain_options;

BSHRINK_API const char* bshrink_version(void);
BSHRINK_API const char* bshrink_last_error(void);
BSHRINK_API const char* bshrink_status_string(bshrink_status status);

BSHRINK_API const char* bshrink_method_name(bshrink_method method);
BSHRINK_API bshrink_status bshrink_method_from_name(const char* name, bshrink_method* out);

/* ---- datasets ---- */

/* x_a, w_a: n_a x p; w_b: n_b x p. y_b and w_b may be NULL when n_b == 0. */
BSHRINK_API bshrink_status bshrink_dataset_create(size_t p, size_t n_a, const double* y_a,
                                                  const double* x_a, const double* w_a,
                                                  size_t n_b, const double* y_b,
                                                  const double* w_b, bshrink_dataset** out);
/* Reads the JSON roles sidecar and the CSV it names. */
BSHRINK_API bshrink_status bshrink_dataset_load(const char* sidecar_path, bshrink_dataset** out);
BSHRINK_API bshrink_status bshrink_dataset_save(const bshrink_dataset* data, const char* csv_path,
                                                const char* sidecar_path);
BSHRINK_API bshrink_status bshrink_dataset_dims(const bshrink_dataset* data, size_t* p,
                                                size_t* n_a, size_t* n_b);
BSHRINK_API void bshrink_dataset_free(bshrink_dataset* data);

/* ---- chains ---- */

/* seed 1, stream 0, burn-in 2500, 1000 stored draws, K = 100, scalar ME. */
BSHRINK_API void bshrink_chain_options_default(bshrink_chain_options* options);

BSHRINK_API bshrink_status bshrink_fit(const bshrink_dataset* data, bshrink_method method,
                                       const bshrink_chain_options* options,
                                       bshrink_chain** out);
BSHRINK_API bshrink_status bshrink_chain_dims(const bshrink_chain* chain, size_t* p,
                                              size_t* draws);
/* Any of the outputs may be NULL; beta arrays need room for p values. */
BSHRINK_API bshrink_status bshrink_chain_summary(const bshrink_chain* chain, double* beta0_hat,
                                                 double* beta_ppm, double* beta_pm,
                                                 double* lambda_final);
/* Writes summary.json, draws.bin, draws.json and xb_mean.csv into dir. */
BSHRINK_API bshrink_status bshrink_chain_save(const bshrink_chain* chain, const char* dir);
/* Reads draws.json (and the binary it names) from dir. */
BSHRINK_API bshrink_status bshrink_chain_load(const char* dir, bshrink_chain** out);
/*
 * Point predictions beta0_hat + x' beta_ppm and equal-tailed predictive
 * intervals at levels (p_lo, p_hi) for each row of x_new (rows x p).
 * Any of point, lo, hi may be NULL.
 */
BSHRINK_API bshrink_status bshrink_predict(const bshrink_chain* chain, const double* x_new,
                                           size_t rows, uint64_t seed, double p_lo, double p_hi,
                                           bshrink_noise noise, double* point, double* lo,
                                           double* hi);
BSHRINK_API void bshrink_chain_free(bshrink_chain* chain);

/* ---- file-level drivers ---- */

/*
 * Runs a simulation experiment described by a JSON config (NULL or "" for
 * the desk profile) and writes results.csv, summary.json and config.json
 * into out_dir. With timing nonzero a wall-time column is added.
 */
BSHRINK_API bshrink_status bshrink_simulate(const char* config_json, const char* out_dir,
                                            int timing);

/*
 * Draws one simulated dataset (replicate `replicate` at the tau_index-th
 * tau of the config) exactly as bshrink_simulate would, and writes
 * data.csv, data.json and validation.csv (y, x1..xp) into out_dir.
 */
BSHRINK_API bshrink_status bshrink_generate(const char* config_json, size_t tau_index,
                                            long replicate, const char* out_dir);

/* Reads a dataset sidecar, fits, and saves the chain into out_dir. */
BSHRINK_API bshrink_status bshrink_fit_files(const char* dataset_sidecar, bshrink_method method,
                                             const bshrink_chain_options* options,
                                             const char* out_dir);

/*
 * Reads a saved chain and an x CSV (columns x1..xp) and writes
 * row,prediction,lower,upper to out_csv.
 */
BSHRINK_API bshrink_status bshrink_predict_files(const char* chain_dir, const char* x_csv,
                                                 uint64_t seed, double p_lo, double p_hi,
                                                 bshrink_noise noise, const char* out_csv);

/*
 * Joint-distribution check of the sampler at dimensions (p, n_a, n_b).
 * Writes a JSON report to out_json when non-NULL; max_abs_z may be NULL.
 */
BSHRINK_API bshrink_status bshrink_geweke(bshrink_method method, size_t p, size_t n_a,
                                          size_t n_b, long iterations, uint64_t seed,
                                          int mutate_sigma2, const char* out_json,
                                          double* max_abs_z);

/* Ridge on complete data (n x p, row-major x) with the penalty chosen by GCV. */
BSHRINK_API bshrink_status bshrink_ridge_gcv(const double* y, const double* x, size_t n, size_t p,
                                             double* beta0, double* beta, double* lambda_star);

#ifdef __cplusplus
}
#endif

#endif
