#ifndef PGARCH_H
#define PGARCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum PgarchStatus {
  PGARCH_STATUS_OK = 0,
  PGARCH_STATUS_NULL_POINTER = 1,
  PGARCH_STATUS_INVALID_ARGUMENT = 2,
  PGARCH_STATUS_INVALID_SPEC = 3,
  PGARCH_STATUS_ORDER = 4,
  PGARCH_STATUS_DEGENERATE = 5,
  PGARCH_STATUS_DIMENSION_MISMATCH = 6,
  PGARCH_STATUS_INSUFFICIENT_DATA = 7,
  PGARCH_STATUS_EMPTY_INPUT = 8,
  PGARCH_STATUS_SINGULAR_INFORMATION = 9,
  PGARCH_STATUS_ALL_STARTS_FAILED = 10,
  PGARCH_STATUS_PRECONDITION = 11,
  PGARCH_STATUS_EXCESSIVE_EXCLUSIONS = 12,
  PGARCH_STATUS_BUFFER_TOO_SMALL = 13,
  PGARCH_STATUS_PANIC = 99,
} PgarchStatus;

typedef enum PgarchDistKind {
  PGARCH_DIST_KIND_GAUSSIAN = 0,
  PGARCH_DIST_KIND_STUDENT_T = 1,
  PGARCH_DIST_KIND_UNIT = 2,
} PgarchDistKind;

typedef enum PgarchDecision {
  PGARCH_DECISION_STRICTLY_NEGATIVE = 0,
  PGARCH_DECISION_NON_NEGATIVE = 1,
  PGARCH_DECISION_INCONCLUSIVE = 2,
} PgarchDecision;

typedef enum PgarchInit {
  PGARCH_INIT_OMEGA = 0,
  PGARCH_INIT_SAMPLE = 1,
} PgarchInit;

/**
 * Opaque estimation result.
 */
typedef struct PgarchFit PgarchFit;

/**
 * Opaque observed or simulated series.
 */
typedef struct PgarchSeries PgarchSeries;

/**
 * Opaque model specification.
 */
typedef struct PgarchSpec PgarchSpec;

/**
 * Innovation law; `dof` is read only for `StudentT`.
 */
typedef struct PgarchDist {
  enum PgarchDistKind kind;
  double dof;
} PgarchDist;

typedef struct PgarchLyapunov {
  double gamma_hat;
  double std_error;
  enum PgarchDecision decision;
} PgarchLyapunov;

typedef struct PgarchFitOptions {
  enum PgarchInit init;
  uintptr_t n_starts;
  uintptr_t max_iters;
  double grad_tol;
  uint64_t seed;
} PgarchFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *pgarch_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pgarch_version(void);

/**
 * # Safety
 * `omega` must point to `period` values, `alpha` to `period * q` and `beta`
 * to `period * p` values; `out` must be writable.
 */
enum PgarchStatus pgarch_spec_new(uintptr_t period,
                                  uintptr_t q,
                                  uintptr_t p,
                                  const double *omega,
                                  const double *alpha,
                                  const double *beta,
                                  struct PgarchSpec **out);

/**
 * # Safety
 * `spec` must come from [`pgarch_spec_new`] and not be used afterwards.
 */
void pgarch_spec_free(struct PgarchSpec *spec);

/**
 * Length of the flattened parameter vector, or 0 for a null handle.
 *
 * # Safety
 * `spec` must be null or a live handle.
 */
uintptr_t pgarch_spec_dim(const struct PgarchSpec *spec);

/**
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum PgarchStatus pgarch_beta_spectral_radius(const struct PgarchSpec *spec, double *out);

/**
 * Monte Carlo estimate of the top Lyapunov exponent over `n_blocks` period
 * blocks.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum PgarchStatus pgarch_lyapunov(const struct PgarchSpec *spec,
                                  struct PgarchDist dist,
                                  uintptr_t n_blocks,
                                  uint64_t seed,
                                  struct PgarchLyapunov *out);

/**
 * Simulates `n_years` years after the default burn-in.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum PgarchStatus pgarch_simulate(const struct PgarchSpec *spec,
                                  struct PgarchDist dist,
                                  uintptr_t n_years,
                                  uint64_t seed,
                                  struct PgarchSeries **out);

/**
 * Wraps `len` observations whose first value falls in season 1.
 *
 * # Safety
 * `values` must point to `len` values and `out` be writable.
 */
enum PgarchStatus pgarch_series_new(const double *values,
                                    uintptr_t len,
                                    uintptr_t period,
                                    struct PgarchSeries **out);

/**
 * # Safety
 * `series` must be null or a live handle.
 */
uintptr_t pgarch_series_len(const struct PgarchSeries *series);

/**
 * Copies the observations into `out`, which must hold at least
 * `pgarch_series_len` values.
 *
 * # Safety
 * `series` must be a live handle and `out` point to `len` writable values.
 */
enum PgarchStatus pgarch_series_values(const struct PgarchSeries *series,
                                       double *out,
                                       uintptr_t len);

/**
 * Copies the true conditional variances of a simulated series.
 *
 * # Safety
 * As [`pgarch_series_values`].
 */
enum PgarchStatus pgarch_series_volatility(const struct PgarchSeries *series,
                                           double *out,
                                           uintptr_t len);

/**
 * # Safety
 * `series` must come from this library and not be used afterwards.
 */
void pgarch_series_free(struct PgarchSeries *series);

struct PgarchFitOptions pgarch_fit_options_default(void);

/**
 * Quasi-maximum likelihood fit of a P-GARCH(p, q) with the series' period.
 * `opts` may be null for defaults.
 *
 * # Safety
 * `series` must be a live handle, `opts` null or valid, `out` writable.
 */
enum PgarchStatus pgarch_fit(const struct PgarchSeries *series,
                             uintptr_t q,
                             uintptr_t p,
                             const struct PgarchFitOptions *opts,
                             struct PgarchFit **out);

/**
 * # Safety
 * `fit` must be null or a live handle.
 */
uintptr_t pgarch_fit_dim(const struct PgarchFit *fit);

/**
 * # Safety
 * `fit` must be a live handle and `out` point to `len` writable values.
 */
enum PgarchStatus pgarch_fit_theta(const struct PgarchFit *fit, double *out, uintptr_t len);

/**
 * # Safety
 * As [`pgarch_fit_theta`].
 */
enum PgarchStatus pgarch_fit_std_errors(const struct PgarchFit *fit, double *out, uintptr_t len);

/**
 * Row-major `dim x dim` covariance of `theta_hat`.
 *
 * # Safety
 * As [`pgarch_fit_theta`].
 */
enum PgarchStatus pgarch_fit_covariance(const struct PgarchFit *fit, double *out, uintptr_t len);

/**
 * Criterion value at the estimate, or NaN for a null handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
double pgarch_fit_objective(const struct PgarchFit *fit);

/**
 * # Safety
 * `fit` must be null or a live handle.
 */
double pgarch_fit_kappa_hat(const struct PgarchFit *fit);

/**
 * # Safety
 * `fit` must be null or a live handle.
 */
bool pgarch_fit_converged(const struct PgarchFit *fit);

/**
 * Full result as JSON; release with [`pgarch_string_free`]. Null on error.
 *
 * # Safety
 * `fit` must be a live handle.
 */
char *pgarch_fit_to_json(const struct PgarchFit *fit);

/**
 * # Safety
 * `fit` must come from [`pgarch_fit`] and not be used afterwards.
 */
void pgarch_fit_free(struct PgarchFit *fit);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void pgarch_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGARCH_H */
