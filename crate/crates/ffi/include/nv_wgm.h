#ifndef NV_WGM_H
#define NV_WGM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NvwStatus {
  NVW_STATUS_OK = 0,
  NVW_STATUS_NULL_POINTER = 1,
  NVW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Trace or positivity check failed during integration.
   */
  NVW_STATUS_NUMERICAL = 3,
  NVW_STATUS_PANIC = 4,
  NVW_STATUS_BUFFER_TOO_SMALL = 5,
} NvwStatus;

typedef enum NvwModel {
  NVW_MODEL_FULL_CAVITY = 0,
  NVW_MODEL_NINE_LEVEL = 1,
  NVW_MODEL_DRESSED_LAMBDA = 2,
  NVW_MODEL_EFFECTIVE_RAMAN = 3,
} NvwModel;

/**
 * Opaque parameter set.
 */
typedef struct NvwParams NvwParams;

/**
 * Opaque result of a config-driven run.
 */
typedef struct NvwRun NvwRun;

/**
 * Effective rates in units of g.
 */
typedef struct NvwRates {
  double theta;
  double xi;
  double gamma_c;
  double gamma_e;
  double excited_occupation;
  double t_entangle;
  double t_transfer;
  bool strong_coupling;
} NvwRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nvw_version(void);

/**
 * Message for the last failed call on this thread (empty after success).
 *
 * # Safety
 * `buf` must hold `len` writable bytes; `written` may be null.
 */
enum NvwStatus nvw_last_error_message(char *buf, size_t len, size_t *written);

/**
 * Default parameters (Δ = 10g, Ω = 0.01g, lossless); null on allocation panic.
 */
struct NvwParams *nvw_params_new_default(void);

/**
 * # Safety
 * `p` must come from `nvw_params_new_default` and not be used afterwards.
 */
void nvw_params_free(struct NvwParams *p);

/**
 * Sets one field by name (`g1`, `delta`, `kappa`, `gamma`, `kappa_scale`, ...).
 * The handle is left unchanged if the result would be invalid.
 *
 * # Safety
 * `p` is a live handle; `name` is a NUL-terminated string.
 */
enum NvwStatus nvw_params_set(struct NvwParams *p, const char *name, double value);

/**
 * # Safety
 * `p` is a live handle; `out` points to writable storage.
 */
enum NvwStatus nvw_effective_rates(const struct NvwParams *p, struct NvwRates *out);

/**
 * Transfers `α|0⟩ + β|1⟩` from emitter 1 to emitter 2 over `ξt = π/2` and
 * reports the fidelity after the phase gate and before it.
 *
 * # Safety
 * `p` is a live handle; the output pointers are writable (either may be null).
 */
enum NvwStatus nvw_transfer_fidelity(const struct NvwParams *p,
                                     enum NvwModel model,
                                     double alpha_re,
                                     double alpha_im,
                                     double beta_re,
                                     double beta_im,
                                     double *fidelity,
                                     double *fidelity_pre_gate);

/**
 * Runs a JSON scenario config (single run or sweep, by scenario) without
 * touching the filesystem. `seed` overrides the config when `has_seed`.
 *
 * # Safety
 * `config_json` is NUL-terminated; `out` is writable.
 */
enum NvwStatus nvw_run_config(const char *config_json,
                              bool has_seed,
                              uint64_t seed,
                              struct NvwRun **out);

/**
 * CSV table of a run, NUL-terminated. `written` receives the size needed
 * including the NUL; a short `len` gives `BufferTooSmall` and writes nothing.
 *
 * # Safety
 * `run` is a live handle; `buf` holds `len` writable bytes; `written` may be null.
 */
enum NvwStatus nvw_run_csv(const struct NvwRun *run, char *buf, size_t len, size_t *written);

/**
 * Metadata record of a run as JSON.
 *
 * # Safety
 * As for [`nvw_run_csv`].
 */
enum NvwStatus nvw_run_meta_json(const struct NvwRun *run, char *buf, size_t len, size_t *written);

/**
 * # Safety
 * `run` must come from `nvw_run_config` and not be used afterwards.
 */
void nvw_run_free(struct NvwRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NV_WGM_H */
