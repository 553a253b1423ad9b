#ifndef LTI_SYSID_H
#define LTI_SYSID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum LtiStatus {
  LTI_STATUS_OK = 0,
  LTI_STATUS_NULL_POINTER = 1,
  LTI_STATUS_INVALID_INPUT = 2,
  LTI_STATUS_DIMENSION_MISMATCH = 3,
  LTI_STATUS_NOT_FOUND = 4,
  LTI_STATUS_IO = 5,
  // Rank deficiency, under-excitation, instability or non-convergence.
  LTI_STATUS_NUMERIC = 6,
  LTI_STATUS_BUFFER_TOO_SMALL = 7,
  LTI_STATUS_PANIC = 8,
} LtiStatus;

// Which estimator `lti_estimate` runs.
typedef enum LtiMethod {
  LTI_METHOD_FULL = 0,
  LTI_METHOD_FINAL_SAMPLE = 1,
  LTI_METHOD_UNEQUAL_LENGTH = 2,
} LtiMethod;

// Which realization matrix to copy out.
typedef enum LtiRealizationPart {
  LTI_REALIZATION_PART_A = 0,
  LTI_REALIZATION_PART_B = 1,
  LTI_REALIZATION_PART_C = 2,
  LTI_REALIZATION_PART_D = 3,
} LtiRealizationPart;

typedef struct LtiDataset LtiDataset;

typedef struct LtiMarkov LtiMarkov;

typedef struct LtiRealization LtiRealization;

typedef struct LtiSystem LtiSystem;

// Standard deviations of the input and the three noise sources.
typedef struct LtiNoise {
  double sigma_u;
  double sigma_w;
  double sigma_v;
  double sigma_0;
} LtiNoise;

// Plain-data copy of a bound evaluation.
typedef struct LtiBound {
  size_t n_threshold;
  bool valid;
  double c0;
  double c1;
  double c2;
  double bound_value;
  double f_norm;
  double dv_norm;
  double h_norm;
} LtiBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *lti_last_error_message(void);

// Builds a system from row-major matrices: `a` is n×n, `b` n×m, `c` p×n,
// `d` p×m, `bw` n×q and `dv` p×l.
//
// # Safety
// Each non-empty matrix pointer must reference enough values for its shape.
enum LtiStatus lti_system_new(size_t n,
                              size_t m,
                              size_t p,
                              size_t q,
                              size_t l,
                              const double *a,
                              const double *b,
                              const double *c,
                              const double *d,
                              const double *bw,
                              const double *dv,
                              struct LtiSystem **out);

// Looks up a builtin system such as `newton`, `newton_delta(0.5)` or
// `unstable_3x3`.
//
// # Safety
// `name` must be a NUL-terminated string.
enum LtiStatus lti_system_builtin(const char *name, struct LtiSystem **out);

// Random system with n=3, m=2, p=2 drawn from `seed`.
//
// # Safety
// `out` must be a valid pointer.
enum LtiStatus lti_system_random(uint64_t seed, struct LtiSystem **out);

// Writes the dimensions n, m, p, q, l. Any output pointer may be NULL.
//
// # Safety
// `sys` must come from this library; non-null outputs must be writable.
enum LtiStatus lti_system_dims(const struct LtiSystem *sys,
                               size_t *n,
                               size_t *m,
                               size_t *p,
                               size_t *q,
                               size_t *l);

// # Safety
// `sys` must be NULL or a pointer returned by this library, freed once.
void lti_system_free(struct LtiSystem *sys);

// Simulates `n_rollouts` rollouts of length `length`.
//
// # Safety
// `sys` must come from this library and `out` must be a valid pointer.
enum LtiStatus lti_simulate(const struct LtiSystem *sys,
                            struct LtiNoise noise,
                            size_t n_rollouts,
                            size_t length,
                            uint64_t seed,
                            struct LtiDataset **out);

// Loads a dataset directory written by `lti_dataset_save` or the CLI.
//
// # Safety
// `dir` must be a NUL-terminated path and `out` a valid pointer.
enum LtiStatus lti_dataset_load(const char *dir, struct LtiDataset **out);

// # Safety
// `ds` must come from this library and `dir` must be a NUL-terminated path.
enum LtiStatus lti_dataset_save(const struct LtiDataset *ds, const char *dir);

// # Safety
// `ds` must come from this library; non-null outputs must be writable.
enum LtiStatus lti_dataset_shape(const struct LtiDataset *ds, size_t *n_rollouts, size_t *length);

// # Safety
// `ds` must be NULL or a pointer returned by this library, freed once.
void lti_dataset_free(struct LtiDataset *ds);

// Estimates `t1` Markov blocks. `t1 = 0` means the rollout length; the
// final-sample method only accepts that.
//
// # Safety
// `ds` must come from this library and `out` must be a valid pointer.
enum LtiStatus lti_estimate(const struct LtiDataset *ds,
                            enum LtiMethod method,
                            size_t t1,
                            struct LtiMarkov **out);

// Exact Markov parameters `[D, CB, CAB, …]` with `horizon` blocks.
//
// # Safety
// `sys` must come from this library and `out` must be a valid pointer.
enum LtiStatus lti_true_markov(const struct LtiSystem *sys, size_t horizon, struct LtiMarkov **out);

// Rows (p), block width (m) and number of blocks.
//
// # Safety
// `g` must come from this library; non-null outputs must be writable.
enum LtiStatus lti_markov_shape(const struct LtiMarkov *g,
                                size_t *rows,
                                size_t *block_width,
                                size_t *horizon);

// Copies the p × (m·horizon) block row into `out` in row-major order.
//
// # Safety
// `out` must have room for `len` doubles.
enum LtiStatus lti_markov_copy(const struct LtiMarkov *g, double *out, size_t len);

// Spectral norm of the difference of two equally shaped block rows.
//
// # Safety
// Both handles must come from this library; `out` must be writable.
enum LtiStatus lti_markov_distance(const struct LtiMarkov *a,
                                   const struct LtiMarkov *b,
                                   double *out);

// # Safety
// `g` must be NULL or a pointer returned by this library, freed once.
void lti_markov_free(struct LtiMarkov *g);

// Ho-Kalman realization of order `order` from a `t1` × `t2h` Hankel layout.
//
// # Safety
// `g` must come from this library and `out` must be a valid pointer.
enum LtiStatus lti_ho_kalman(const struct LtiMarkov *g,
                             size_t order,
                             size_t t1,
                             size_t t2h,
                             struct LtiRealization **out);

// # Safety
// `r` must come from this library; non-null outputs must be writable.
enum LtiStatus lti_realization_shape(const struct LtiRealization *r,
                                     enum LtiRealizationPart part,
                                     size_t *rows,
                                     size_t *cols);

// Copies one of Â, B̂, Ĉ, D̂ in row-major order.
//
// # Safety
// `out` must have room for `len` doubles.
enum LtiStatus lti_realization_copy(const struct LtiRealization *r,
                                    enum LtiRealizationPart part,
                                    double *out,
                                    size_t len);

// True when the order gap warning fired; the text is then available
// through `lti_last_error_message` until the next call.
//
// # Safety
// `r` must come from this library.
bool lti_realization_has_warning(const struct LtiRealization *r);

// Markov parameters of the realization with `horizon` blocks.
//
// # Safety
// `r` must come from this library and `out` must be a valid pointer.
enum LtiStatus lti_realization_markov(const struct LtiRealization *r,
                                      size_t horizon,
                                      struct LtiMarkov **out);

// # Safety
// `r` must be NULL or a pointer returned by this library, freed once.
void lti_realization_free(struct LtiRealization *r);

// High-probability error bound for zero initial states.
//
// # Safety
// `sys` must come from this library and `out` must be writable.
enum LtiStatus lti_theorem1_bound(const struct LtiSystem *sys,
                                  struct LtiNoise noise,
                                  size_t horizon,
                                  size_t n_rollouts,
                                  double delta,
                                  struct LtiBound *out);

// Error bound including random initial states.
//
// # Safety
// `sys` must come from this library and `out` must be writable.
enum LtiStatus lti_corollary2_bound(const struct LtiSystem *sys,
                                    struct LtiNoise noise,
                                    size_t horizon,
                                    size_t n_rollouts,
                                    double delta,
                                    struct LtiBound *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LTI_SYSID_H */
