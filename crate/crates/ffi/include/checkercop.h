#ifndef CHECKERCOP_H
#define CHECKERCOP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every entry point.
 */
typedef enum {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_DOMAIN = 2,
  CC_STATUS_VALIDATION = 3,
  CC_STATUS_UNSUPPORTED_DIMENSION = 4,
  CC_STATUS_BOUNDARY = 5,
  CC_STATUS_DEGENERATE_MARGIN = 6,
  CC_STATUS_PARSE = 7,
  CC_STATUS_IO = 8,
  CC_STATUS_NUMERIC = 9,
  CC_STATUS_PANIC = 10,
} CcStatus;

/**
 * Multiplier distribution for [`cc_independence_test`].
 */
typedef enum {
  CC_LAW_NORMAL = 0,
  CC_LAW_RADEMACHER = 1,
} CcLaw;

/**
 * Checkerboard copula handle.
 */
typedef struct CcCopula CcCopula;

/**
 * Discrete margin handle.
 */
typedef struct CcMargin CcMargin;

/**
 * Ranked sample handle.
 */
typedef struct CcSample CcSample;

/**
 * Sample statistics. Entries undefined for the sample (bivariate-only
 * measures when d > 2, Kendall's tau when n < 2) are NaN.
 */
typedef struct {
  size_t n;
  size_t d;
  double kendall_tau;
  double spearman_rho;
  double spearman_rho_multivariate;
  double chi_squared;
  double g_squared;
  double cramer_von_mises;
} CcStats;

/**
 * Outcome of the multiplier-bootstrap independence test.
 */
typedef struct {
  double statistic;
  double p_value;
  size_t replicates;
} CcTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on the calling thread, or an empty
 * string. The pointer stays valid until the next failing call on the
 * same thread.
 */
const char *cc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cc_version(void);

/**
 * Margin with support {0, ..., len-1} and the given probabilities.
 */
CcStatus cc_margin_from_pmf(const double *pmf, size_t len, CcMargin **out);

/**
 * Margin from a name such as `F1`, `binomial(3,0.5)`, `poisson(20)` or
 * `geometric(0.8)`.
 */
CcStatus cc_margin_from_spec(const char *spec, CcMargin **out);

void cc_margin_free(CcMargin *m);

/**
 * Number of support points.
 */
CcStatus cc_margin_len(const CcMargin *m, size_t *out);

/**
 * F(k) for the category index k (negative k gives 0).
 */
CcStatus cc_margin_cdf(const CcMargin *m, ptrdiff_t k, double *out);

/**
 * Smallest category index k with F(k) >= u, for u in (0, 1].
 */
CcStatus cc_margin_quantile(const CcMargin *m, double u, size_t *out);

/**
 * Checkerboard copula of a joint pmf given as a row-major array of
 * `prod(shape)` cell probabilities.
 */
CcStatus cc_copula_from_cells(const size_t *shape,
                              size_t dim,
                              const double *cells,
                              size_t len,
                              CcCopula **out);

/**
 * Checkerboard copula of the product of `count` margins.
 */
CcStatus cc_copula_from_margins(const CcMargin *const *margins, size_t count, CcCopula **out);

/**
 * Empirical checkerboard copula of a sample.
 */
CcStatus cc_copula_from_sample(const CcSample *s, CcCopula **out);

void cc_copula_free(CcCopula *c);

CcStatus cc_copula_dim(const CcCopula *c, size_t *out);

/**
 * C(u) for a point `u` of length `dim`.
 */
CcStatus cc_copula_cdf(const CcCopula *c, const double *u, size_t dim, double *out);

/**
 * Density of the copula at an interior point.
 */
CcStatus cc_copula_density(const CcCopula *c, const double *u, size_t dim, double *out);

/**
 * Population Kendall's tau (bivariate only).
 */
CcStatus cc_copula_tau(const CcCopula *c, double *out);

/**
 * Population Spearman's rho (multivariate version for d > 2).
 */
CcStatus cc_copula_rho(const CcCopula *c, double *out);

/**
 * Integrated squared distance to the independence copula.
 */
CcStatus cc_copula_gap(const CcCopula *c, double *out);

/**
 * Sample of `n` observations in `d` coordinates, row-major.
 */
CcStatus cc_sample_new(const double *data, size_t n, size_t d, CcSample **out);

void cc_sample_free(CcSample *s);

CcStatus cc_sample_stats(const CcSample *s, CcStats *out);

/**
 * Multiplier-bootstrap test of independence with `replicates` multiplier
 * draws seeded by `seed`. Same inputs give the same p-value.
 */
CcStatus cc_independence_test(const CcSample *s,
                              size_t replicates,
                              CcLaw law,
                              uint64_t seed,
                              CcTestResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHECKERCOP_H */
