#ifndef POTTSLAB_H
#define POTTSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PottsStatus {
  POTTS_STATUS_OK = 0,
  POTTS_STATUS_NULL_POINTER = 1,
  POTTS_STATUS_INVALID_PARAMS = 2,
  POTTS_STATUS_INVALID_TREE = 3,
  POTTS_STATUS_OUT_OF_RANGE = 4,
  POTTS_STATUS_INVALID_VECTOR = 5,
  POTTS_STATUS_PRECONDITION = 6,
  POTTS_STATUS_PARSE = 7,
  POTTS_STATUS_TOO_LARGE = 8,
  POTTS_STATUS_BUFFER_TOO_SMALL = 9,
  POTTS_STATUS_INVALID_UTF8 = 10,
  POTTS_STATUS_PANIC = 11,
} PottsStatus;

/**
 * A tree with its boundary condition and parameters.
 */
typedef struct PottsTree PottsTree;

/**
 * Model parameters: `q` colors, edge weight `w`, branching bound `d`.
 */
typedef struct PottsParameters {
  size_t q;
  double w;
  size_t d;
} PottsParameters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *potts_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *potts_version(void);

/**
 * Parses a tree document:
 * `{"q": 3, "w": 0.5, "root": 0, "edges": [[0, 1]], "boundary": {"1": 2}}`
 * with 1-based boundary colors. On success `*out` owns a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum PottsStatus potts_tree_from_json(const char *json, struct PottsTree **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `tree` must come from [`potts_tree_from_json`] and not be freed twice.
 */
void potts_tree_free(struct PottsTree *tree);

/**
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum PottsStatus potts_tree_vertex_count(const struct PottsTree *tree, size_t *out);

/**
 * Parameters the tree document was loaded with.
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum PottsStatus potts_tree_params(const struct PottsTree *tree, struct PottsParameters *out);

/**
 * Marginals of free vertex `vertex` by the tree recursion; `out` gets `q`
 * values.
 *
 * # Safety
 * `tree` must be a live handle and `out` must hold `out_len` doubles.
 */
enum PottsStatus potts_tree_marginals(const struct PottsTree *tree,
                                      size_t vertex,
                                      double *out,
                                      size_t out_len);

/**
 * Same as [`potts_tree_marginals`] by exhaustive enumeration; at most 16
 * free vertices.
 *
 * # Safety
 * `tree` must be a live handle and `out` must hold `out_len` doubles.
 */
enum PottsStatus potts_tree_marginals_exact(const struct PottsTree *tree,
                                            size_t vertex,
                                            double *out,
                                            size_t out_len);

/**
 * `F(x)_i = sqrt(S_i(x) / S(x))` for a positive vector of length `q`.
 *
 * # Safety
 * `x` must hold `q` doubles and `out` `out_len` doubles.
 */
enum PottsStatus potts_apply_f(const struct PottsParameters *params,
                               const double *x,
                               size_t q,
                               double *out,
                               size_t out_len);

/**
 * Dense Jacobian of `F` at `x`, row-major, `q * q` values.
 *
 * # Safety
 * `x` must hold `q` doubles and `out` `out_len` doubles.
 */
enum PottsStatus potts_jacobian(const struct PottsParameters *params,
                                const double *x,
                                size_t q,
                                double *out,
                                size_t out_len);

/**
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum PottsStatus potts_bound_m(const struct PottsParameters *params, double *out);

/**
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum PottsStatus potts_bound_b(const struct PottsParameters *params, size_t ell, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PottsStatus potts_bound_k(double a, double *out);

/**
 * Reads only `q` and `d`.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum PottsStatus potts_alpha_wsm(const struct PottsParameters *params, double *out);

/**
 * Closed form; reads only `q` and `d`.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum PottsStatus potts_alpha_ssm(const struct PottsParameters *params, double *out);

/**
 * Numeric solve, also where the closed form does not apply.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum PottsStatus potts_alpha_ssm_extrapolated(const struct PottsParameters *params, double *out);

/**
 * Local weight `λ` on the segment between positive vectors `x` and `y`.
 *
 * # Safety
 * `x` and `y` must hold `q` doubles and `out` must be writable.
 */
enum PottsStatus potts_local_weight(const struct PottsParameters *params,
                                    const double *x,
                                    const double *y,
                                    size_t q,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POTTSLAB_H */
