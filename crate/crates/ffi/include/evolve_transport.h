#ifndef EVOLVE_TRANSPORT_H
#define EVOLVE_TRANSPORT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible entry point.
typedef enum EtStatus {
  ET_STATUS_OK = 0,
  ET_STATUS_NULL_POINTER = 1,
  ET_STATUS_INVALID_ARGUMENT = 2,
  ET_STATUS_UNKNOWN_SCENARIO = 3,
  ET_STATUS_UNKNOWN_FIELD = 4,
  ET_STATUS_WINDOW_EXCEEDED = 5,
  // Rank deficiency, ambiguous orientation, non-finite values and similar.
  ET_STATUS_NUMERICAL_FAILURE = 6,
  ET_STATUS_OUT_OF_RANGE = 7,
  ET_STATUS_PANIC = 99,
} EtStatus;

// Opaque scenario handle.
typedef struct EtScenario EtScenario;

// Both sides of the transport identity at one time. Numbers are NaN and
// `failed` is 1 when a component of the evaluation failed.
typedef struct EtTransportReport {
  double t;
  double lhs;
  double rhs_bulk;
  double rhs_boundary;
  double rhs;
  double abs_residual;
  double rel_residual;
  double tolerance;
  int passed;
  int failed;
} EtTransportReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread (empty after a
// success). The pointer stays valid until the next call on the same thread.
const char *et_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a pointer obtained from this library and not yet freed.
void et_string_free(char *s);

// Number of built-in scenarios.
size_t et_scenario_count(void);

// Name of the scenario at `index`, as a caller-owned string.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum EtStatus et_scenario_name(size_t index, char **out);

// Opens a scenario by name. Release the handle with [`et_scenario_close`].
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum EtStatus et_scenario_open(const char *name, struct EtScenario **out);

// Releases a scenario handle. Null is ignored.
//
// # Safety
// `s` must be null or a handle from [`et_scenario_open`] not yet closed.
void et_scenario_close(struct EtScenario *s);

// Time window `[t_min, t_max]` of the scenario.
//
// # Safety
// `s` must be a live handle; `t_min` and `t_max` must be writable.
enum EtStatus et_scenario_time_window(const struct EtScenario *s, double *t_min, double *t_max);

// Manifold dimension `m`, ambient dimension `d` and boundary chart count.
//
// # Safety
// `s` must be a live handle; the out-pointers must be writable.
enum EtStatus et_scenario_dims(const struct EtScenario *s,
                               size_t *manifold_dim,
                               size_t *ambient_dim,
                               size_t *boundary_charts);

// Normal velocity `V∂` at boundary parameter `z` (length `m - 1`) of
// `chart` at time `t`.
//
// # Safety
// `s` must be a live handle, `z` must point to `z_len` doubles (or be null
// when `z_len` is 0), and `out` must be writable.
enum EtStatus et_normal_velocity(const struct EtScenario *s,
                                 double t,
                                 size_t chart,
                                 const double *z,
                                 size_t z_len,
                                 double *out);

// Exterior unit normal at boundary parameter `z`, written to `out`, which
// must hold the ambient dimension `d` doubles.
//
// # Safety
// As [`et_normal_velocity`], with `out` pointing to `out_len` doubles.
enum EtStatus et_exterior_normal(const struct EtScenario *s,
                                 double t,
                                 size_t chart,
                                 const double *z,
                                 size_t z_len,
                                 double *out,
                                 size_t out_len);

// Both sides of the transport identity for `field` at time `t` with step
// `h` and Gauss order `order`. A failed evaluation still fills `out`
// (with `failed = 1`) and returns `ET_STATUS_OK`; its cause is available
// from [`et_last_error`].
//
// # Safety
// `s` must be a live handle, `field` a NUL-terminated string, `out` writable.
enum EtStatus et_verify_transport(const struct EtScenario *s,
                                  const char *field,
                                  double t,
                                  double h,
                                  size_t order,
                                  struct EtTransportReport *out);

// Runs the full verification suite and returns its JSON report as a
// caller-owned string. `*passed` is set to 1 when every criterion passes.
//
// # Safety
// `out` and `passed` must be writable.
enum EtStatus et_run_all_json(size_t order,
                              double h,
                              size_t samples,
                              uint64_t seed,
                              int monte_carlo,
                              char **out,
                              int *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOLVE_TRANSPORT_H */
