/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef EXPECTATION_ATLAS_H
#define EXPECTATION_ATLAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EaIntegrator {
  EA_INTEGRATOR_EULER = 0,
  EA_INTEGRATOR_RK4 = 1,
} EaIntegrator;

// Result of every fallible call.
typedef enum EaStatus {
  EA_STATUS_OK = 0,
  EA_STATUS_NULL_POINTER = 1,
  EA_STATUS_VALIDATION = 2,
  EA_STATUS_DOMAIN = 3,
  EA_STATUS_NUMERICAL = 4,
  EA_STATUS_PRECONDITION = 5,
  EA_STATUS_UNSUPPORTED = 6,
  EA_STATUS_PARSE = 7,
  EA_STATUS_IO = 8,
  EA_STATUS_BUFFER_TOO_SMALL = 9,
  EA_STATUS_PANIC = 10,
} EaStatus;

typedef enum EaClassification {
  EA_CLASSIFICATION_INTERIOR = 0,
  EA_CLASSIFICATION_BOUNDARY = 1,
  EA_CLASSIFICATION_EXTERIOR = 2,
  EA_CLASSIFICATION_INCONCLUSIVE = 3,
} EaClassification;

// Opaque result of an inverse-flow run.
typedef struct EaFlowResult EaFlowResult;

// Opaque validated operator set.
typedef struct EaOperatorSet EaOperatorSet;

// Flow settings. A non-positive `beta_cap` selects the default cap.
typedef struct EaFlowParams {
  double dt;
  size_t max_steps;
  double delta_tol;
  double beta_cap;
  enum EaIntegrator integrator;
} EaFlowParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on this thread.
const char *ea_last_error_message(void);

// Library version as a static nul-terminated string.
const char *ea_version(void);

// Defaults: Euler, `dt = 0.4`, 2000 steps, `delta_tol = 1e-16`, automatic cap.
struct EaFlowParams ea_flow_params_default(void);

// Builds a set of `count` operators of size `dim` x `dim` from row-major
// arrays of length `count * dim * dim`; `im` may be null.
//
// # Safety
// `re` (and `im` when non-null) must point to `count * dim * dim` doubles;
// `out` must be a valid pointer to write the handle to.
enum EaStatus ea_operator_set_new(size_t dim,
                                  size_t count,
                                  const double *re,
                                  const double *im,
                                  struct EaOperatorSet **out);

// Parses an operator-set JSON document (the CLI input format).
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum EaStatus ea_operator_set_from_json(const char *json, struct EaOperatorSet **out);

// Releases a handle; null is ignored.
//
// # Safety
// `set` must come from this library and not be used afterwards.
void ea_operator_set_free(struct EaOperatorSet *set);

// Number of operators, or 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
size_t ea_operator_set_len(const struct EaOperatorSet *set);

// Hilbert-space dimension, or 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
size_t ea_operator_set_dim(const struct EaOperatorSet *set);

// Writes `E(beta)` into `out` (length `n`, equal to the set size).
//
// # Safety
// `beta` and `out` must point to `n` doubles.
enum EaStatus ea_expectation_map(const struct EaOperatorSet *set,
                                 const double *beta,
                                 size_t n,
                                 double *out);

// Smallest eigenvalue of `sum_i dir_i O_i` for the normalized direction.
//
// # Safety
// `dir` must point to `n` doubles; `out` must be writable.
enum EaStatus ea_support_value(const struct EaOperatorSet *set,
                               const double *dir,
                               size_t n,
                               double *out);

// Traces the boundary of a two-operator set. Writes up to `capacity`
// points as `(x, y)` pairs into `xy` (length `2 * capacity`) and the number
// of points into `written`. `2 * num_dirs` points always suffice.
//
// # Safety
// `xy` must point to `2 * capacity` doubles; `written` must be writable.
enum EaStatus ea_trace_boundary(const struct EaOperatorSet *set,
                                size_t num_dirs,
                                double *xy,
                                size_t capacity,
                                size_t *written);

// Runs the inverse flow from `beta = 0` toward `target`. `params` may be null.
//
// # Safety
// `target` must point to `n` doubles; `out` must be writable.
enum EaStatus ea_solve(const struct EaOperatorSet *set,
                       const double *target,
                       size_t n,
                       const struct EaFlowParams *params,
                       struct EaFlowResult **out);

// Releases a flow result; null is ignored.
//
// # Safety
// `result` must come from [`ea_solve`] and not be used afterwards.
void ea_flow_result_free(struct EaFlowResult *result);

// Verdict of a flow run; a null handle reads as inconclusive.
//
// # Safety
// `result` must be null or a live handle.
enum EaClassification ea_flow_result_classification(const struct EaFlowResult *result);

// Final `|E - e|^2 / 2`, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double ea_flow_result_residual(const struct EaFlowResult *result);

// Accepted steps, excluding the initial point.
//
// # Safety
// `result` must be null or a live handle.
size_t ea_flow_result_steps(const struct EaFlowResult *result);

// Copies the final `beta` (length `n`).
//
// # Safety
// `out` must point to `n` doubles.
enum EaStatus ea_flow_result_beta(const struct EaFlowResult *result, double *out, size_t n);

// Copies the Gibbs state (row-major, `dim * dim` entries each) for an
// interior verdict; other verdicts return `EA_STATUS_PRECONDITION`.
//
// # Safety
// `re` and `im` must point to `dim * dim` doubles.
enum EaStatus ea_flow_result_state(const struct EaFlowResult *result,
                                   double *re,
                                   double *im,
                                   size_t dim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPECTATION_ATLAS_H */
