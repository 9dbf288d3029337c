#ifndef VEGASPLUS_H
#define VEGASPLUS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum VpStatus {
  VP_STATUS_OK = 0,
  VP_STATUS_NULL_POINTER = 1,
  VP_STATUS_INVALID_ARGUMENT = 2,
  VP_STATUS_UNKNOWN_INTEGRAND = 3,
  VP_STATUS_CALLBACK_FAILED = 4,
  VP_STATUS_NON_FINITE = 5,
  VP_STATUS_INTEGRATION_FAILED = 6,
  VP_STATUS_PANIC = 7,
} VpStatus;

/*
 Integration parameters.
 */
typedef struct VpConfig VpConfig;

/*
 Outcome of a successful integration.
 */
typedef struct VpResult VpResult;

/*
 Batched integrand: evaluate `n` points of `dims` coordinates, stored
 row-major in `points`, into `out[0..n]`. Return 0 on success; any other
 value aborts the integration with [`VpStatus::CallbackFailed`].
 */
typedef int (*VpBatchFn)(void *user_data, const double *points, size_t n, size_t dims, double *out);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 New configuration with the default parameters. Never null.
 */
struct VpConfig *vp_config_new(void);

/*
 # Safety
 `cfg` is null or a handle from [`vp_config_new`] not yet freed.
 */
void vp_config_free(struct VpConfig *cfg);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_n_eval(struct VpConfig *cfg, uint64_t value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_iterations(struct VpConfig *cfg, size_t value);

/*
 Iterations `1..=skip` adapt but are left out of the result.

 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_skip(struct VpConfig *cfg, size_t value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_alpha(struct VpConfig *cfg, double value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_beta(struct VpConfig *cfg, double value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_n_intervals(struct VpConfig *cfg, size_t value);

/*
 0 restores the automatic choice.

 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_n_strat(struct VpConfig *cfg, size_t value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_batch_size(struct VpConfig *cfg, size_t value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_workers(struct VpConfig *cfg, size_t value);

/*
 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_seed(struct VpConfig *cfg, uint64_t value);

/*
 Nonzero allows concurrent callback invocations from worker threads;
 by default calls are serialized.

 # Safety
 `cfg` is null or a live handle from [`vp_config_new`].
 */
enum VpStatus vp_config_set_thread_safe_callback(struct VpConfig *cfg, int value);

/*
 Integrates a batched callback over the box `[lower[j], upper[j]]`.

 On success `*out` receives a result handle to release with
 [`vp_result_free`]; on failure `*out` is left untouched.

 # Safety
 `cfg` is a live config handle, `lower` and `upper` point to `dims`
 values, `out` is writable, and `f` honours the [`VpBatchFn`] contract.
 */
enum VpStatus vp_integrate(const struct VpConfig *cfg,
                           VpBatchFn f,
                           void *user_data,
                           size_t dims,
                           const double *lower,
                           const double *upper,
                           struct VpResult **out);

/*
 Integrates a built-in integrand by registry name at its default size.

 # Safety
 `cfg` is a live config handle, `name` a NUL-terminated string and `out`
 writable.
 */
enum VpStatus vp_integrate_builtin(const struct VpConfig *cfg,
                                   const char *name,
                                   struct VpResult **out);

/*
 # Safety
 `res` is null or a handle from a successful integration, not yet freed.
 */
void vp_result_free(struct VpResult *res);

/*
 Combined estimate; NaN for a null handle.

 # Safety
 `res` is null or a live result handle.
 */
double vp_result_mean(const struct VpResult *res);

/*
 # Safety
 `res` is null or a live result handle.
 */
double vp_result_sigma(const struct VpResult *res);

/*
 # Safety
 `res` is null or a live result handle.
 */
double vp_result_chi2_dof(const struct VpResult *res);

/*
 # Safety
 `res` is null or a live result handle.
 */
size_t vp_result_n_iterations(const struct VpResult *res);

/*
 Per-iteration estimate and sigma; `included` is 1 if the iteration
 enters the combined result. Output pointers may be null.

 # Safety
 `res` is a live result handle; non-null outputs are writable.
 */
enum VpStatus vp_result_iteration(const struct VpResult *res,
                                  size_t index,
                                  double *estimate,
                                  double *sigma,
                                  int *included);

/*
 Message of the last failed call on this thread; empty after a success.
 Valid until the next call on the same thread.
 */
const char *vp_last_error(void);

/*
 Library version, static storage.
 */
const char *vp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VEGASPLUS_H */
