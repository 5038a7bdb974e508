/* C interface for the extended Conway-Maxwell-Poisson distribution library.
 *
 * Mirrors the exported symbols of the ecomp-ffi crate. Handles are opaque;
 * every fallible call returns an ecomp_status and writes results through
 * out pointers. Link against libecomp_ffi (static or shared).
 */

#ifndef ECOMP_H
#define ECOMP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecomp_status {
  ECOMP_OK = 0,
  ECOMP_INVALID_PARAMS = 1,
  ECOMP_DOMAIN_ERROR = 2,
  ECOMP_NON_CONVERGENT = 3,
  ECOMP_NULL_POINTER = 4,
  ECOMP_STATE_CAP_EXCEEDED = 5,
  ECOMP_NO_CONVERGENCE = 6,
  ECOMP_DATA_TOO_SPARSE = 7,
  ECOMP_DEGENERATE_CELLS = 8,
  ECOMP_INVALID_TABLE = 9,
} ecomp_status;

typedef enum ecomp_mode_kind {
  ECOMP_MODE_UNIQUE_AT_ZERO = 0,
  ECOMP_MODE_UNIQUE_INTERIOR = 1,
  ECOMP_MODE_DUAL = 2,
} ecomp_mode_kind;

/* Opaque handles. */
typedef struct EcompDist EcompDist;
typedef struct EcompSampler EcompSampler;

/* Flat fit summary. */
typedef struct ecomp_fit_summary {
  double nu;
  double p;
  double alpha;
  double beta;
  double loglik;
  double aic;
  double chisq;
  int64_t df;
  double p_value;
  int converged;   /* 1 when the optimizer converged */
  int at_boundary; /* 1 when the estimate sits on a sub-model boundary */
} ecomp_fit_summary;

/* Library version as a static string. */
const char *ecomp_version(void);

/* Static description of a status code. */
const char *ecomp_status_describe(ecomp_status status);

/* Validates a parameter point without building a handle. */
ecomp_status ecomp_params_valid(double nu, double p, double alpha, double beta);

/* Distribution handle lifecycle. */
ecomp_status ecomp_dist_new(double nu, double p, double alpha, double beta,
                            EcompDist **out);
void ecomp_dist_free(EcompDist *dist);

/* Pointwise queries. */
ecomp_status ecomp_dist_log_pmf(const EcompDist *dist, uint64_t k, double *out);
ecomp_status ecomp_dist_pmf(const EcompDist *dist, uint64_t k, double *out);
ecomp_status ecomp_dist_cdf(const EcompDist *dist, uint64_t k, double *out);
ecomp_status ecomp_dist_survival(const EcompDist *dist, uint64_t k, double *out);
ecomp_status ecomp_dist_hazard(const EcompDist *dist, uint64_t k, double *out);

/* Log normalizing constant; *asymptotic (nullable) is set to 1 when the
 * value came from the asymptotic approximation. */
ecomp_status ecomp_dist_log_normalizer(const EcompDist *dist, double *out,
                                       int *asymptotic);

/* Mean and variance; *approximate (nullable) is set to 1 when the
 * asymptotic fallback was used. */
ecomp_status ecomp_dist_mean_variance(const EcompDist *dist, double *out_mean,
                                      double *out_variance, int *approximate);

/* r-th factorial moment, r >= 1. */
ecomp_status ecomp_dist_factorial_moment(const EcompDist *dist, uint32_t r,
                                         double *out);

/* Mode structure; modes must hold 2 entries, *n_modes receives 1 or 2. */
ecomp_status ecomp_dist_mode(const EcompDist *dist, uint64_t *modes,
                             size_t *n_modes, ecomp_mode_kind *kind);

/* Sampler handle lifecycle; draws are reproducible for a given seed. A
 * sampler must not be used from two threads at once. */
ecomp_status ecomp_sampler_new(double nu, double p, double alpha, double beta,
                               uint64_t seed, EcompSampler **out);
void ecomp_sampler_free(EcompSampler *sampler);

/* Fills buf with n draws. */
ecomp_status ecomp_sampler_fill(EcompSampler *sampler, uint64_t *buf, size_t n);

/* Maximum-likelihood fit with default settings. counts/freqs are parallel
 * arrays of n_cells fully observed rows; when tail_freq > 0 a censored
 * "tail_threshold or more" cell is appended. model: 0 ecomp, 1 comnb,
 * 2 gcomp, 3 nb, 4 comp, 5 poisson. */
ecomp_status ecomp_fit(const uint64_t *counts, const uint64_t *freqs,
                       size_t n_cells, uint64_t tail_threshold,
                       uint64_t tail_freq, int model, ecomp_fit_summary *out);

#ifdef __cplusplus
}
#endif

#endif /* ECOMP_H */
