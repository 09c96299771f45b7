/* C interface to the circle factorization library. Generated by cbindgen. */

#ifndef CIRCLE_COLIM_H
#define CIRCLE_COLIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Opaque handle to an orientation-preserving circle diffeomorphism.
 */
typedef struct CcDiffeo CcDiffeo;

/**
 * Opaque handle to a sampled loop in SU(2) or SU(3).
 */
typedef struct CcLoop CcLoop;

/**
 * Status codes: 0 success, 1 invalid input, 2 contract violation (a
 * mathematical postcondition failed), 3 null pointer or panic.
 */
typedef int32_t CcStatus;

#define CC_OK 0

#define CC_INVALID 1

#define CC_CONTRACT 2

#define CC_NULL 3

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *cc_last_error(void);

/**
 * Release a string returned by this library.
 */
void cc_string_free(char *s);

/**
 * Build a diffeomorphism from `n` lift samples at t_k = 2 pi k / n. The
 * samples must be strictly increasing and `n` a power of two, at least 16.
 */
CcStatus cc_diffeo_from_lift(const double *lift, uintptr_t n, struct CcDiffeo **out);

CcStatus cc_diffeo_identity(uintptr_t n, struct CcDiffeo **out);

void cc_diffeo_free(struct CcDiffeo *h);

CcStatus cc_diffeo_n_samples(const struct CcDiffeo *h, uintptr_t *out);

/**
 * Copy the lift samples into `buf`, which must hold `n_samples` doubles.
 */
CcStatus cc_diffeo_lift(const struct CcDiffeo *h, double *buf);

CcStatus cc_diffeo_displacement(const struct CcDiffeo *h, double *out);

/**
 * Evaluate the lift at an arbitrary real argument.
 */
CcStatus cc_diffeo_eval(const struct CcDiffeo *h, double t, double *out);

CcStatus cc_diffeo_compose(const struct CcDiffeo *a,
                           const struct CcDiffeo *b,
                           struct CcDiffeo **out);

CcStatus cc_diffeo_invert(const struct CcDiffeo *h, struct CcDiffeo **out);

CcStatus cc_diffeo_sup_distance(const struct CcDiffeo *a, const struct CcDiffeo *b, double *out);

/**
 * Factor a small-displacement diffeomorphism over the uniform cover with
 * `n_intervals` intervals and overlap margin `d`. `out` must hold
 * `n_intervals` handle slots; on success each slot owns one factor,
 * supported in the corresponding cover interval, and their composition
 * (left to right) reproduces the input.
 */
CcStatus cc_diffeo_factor_uniform(const struct CcDiffeo *h,
                                  uintptr_t n_intervals,
                                  double d,
                                  struct CcDiffeo **out);

/**
 * Split phi into phi_minus o phi_plus with supports in the two given arcs,
 * which must cover the circle and intersect in two arcs of length 2 d.
 */
CcStatus cc_diffeo_split_circle(const struct CcDiffeo *h,
                                double minus_start,
                                double minus_length,
                                double plus_start,
                                double plus_length,
                                double d,
                                struct CcDiffeo **out_minus,
                                struct CcDiffeo **out_plus);

/**
 * Matrix entries per sample for a group descriptor ("su2" or "su3"): the
 * sample layout is row-major, each entry an interleaved (re, im) pair, so a
 * sample takes 2 * size * size doubles.
 */
CcStatus cc_group_matrix_size(const char *group, uintptr_t *out);

/**
 * Build a loop from `n` unitary samples; `values` holds
 * n * 2 * size * size doubles as described at `cc_group_matrix_size`.
 */
CcStatus cc_loop_from_samples(const char *group,
                              uintptr_t n,
                              const double *values,
                              struct CcLoop **out);

void cc_loop_free(struct CcLoop *h);

CcStatus cc_loop_n_samples(const struct CcLoop *h, uintptr_t *out);

/**
 * Copy the samples into `buf` in the layout of `cc_loop_from_samples`.
 */
CcStatus cc_loop_samples(const struct CcLoop *h, double *buf);

CcStatus cc_loop_multiply(const struct CcLoop *a, const struct CcLoop *b, struct CcLoop **out);

CcStatus cc_loop_invert(const struct CcLoop *h, struct CcLoop **out);

CcStatus cc_loop_sup_distance(const struct CcLoop *a, const struct CcLoop *b, double *out);

/**
 * Factor a chart-domain loop over the uniform cover with `n_intervals`
 * intervals and overlap margin `d`. `out` must hold `n_intervals` handle
 * slots; the factors commute pairwise and multiply back to the input.
 */
CcStatus cc_loop_factor_uniform(const struct CcLoop *h,
                                uintptr_t n_intervals,
                                double d,
                                struct CcLoop **out);

/**
 * Virasoro cocycle of two vector fields given as JSON mode maps
 * (`{"modes": {"-2": [re, im]}}`). `quadrature` nonzero selects contour
 * quadrature on `grid` points instead of the exact mode formula.
 */
CcStatus cc_virasoro_cocycle(const char *f_json,
                             const char *g_json,
                             int32_t quadrature,
                             uintptr_t grid,
                             double *out_re,
                             double *out_im);

/**
 * Number of level-k highest weights for "su2" or "su3".
 */
CcStatus cc_weight_count(const char *group, int64_t level, uintptr_t *out);

/**
 * Run one numbered acceptance criterion (1 to 11). Returns CC_OK if it
 * passes and CC_CONTRACT with the failure detail in `cc_last_error` if not.
 */
CcStatus cc_selftest_criterion(uintptr_t id, uint64_t seed);

/**
 * Run the whole acceptance suite; on return `*out_json` owns a
 * machine-readable report (release with `cc_string_free`). Returns CC_OK
 * only if every criterion passes.
 */
CcStatus cc_selftest_run(uint64_t seed, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCLE_COLIM_H */
