#ifndef PMSM_H
#define PMSM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PMSM_N_KPIS 7

#define PMSM_N_LOSSES 4

typedef enum {
  PMSM_STATUS_OK = 0,
  PMSM_STATUS_NULL_POINTER = 1,
  PMSM_STATUS_CONFIG = 2,
  PMSM_STATUS_RANGE = 3,
  PMSM_STATUS_SHAPE = 4,
  PMSM_STATUS_NUMERIC = 5,
  PMSM_STATUS_FORMAT = 6,
  PMSM_STATUS_VERSION = 7,
  PMSM_STATUS_TRUNCATED = 8,
  PMSM_STATUS_CHECKSUM = 9,
  PMSM_STATUS_MISSING_FILE = 10,
  PMSM_STATUS_IO = 11,
  PMSM_STATUS_DIVERGED = 12,
  /**
   * Output buffer too small.
   */
  PMSM_STATUS_BUFFER = 13,
  PMSM_STATUS_PANIC = 14,
} PmsmStatus;

typedef enum {
  PMSM_NET_KIND_HYBRID = 0,
  PMSM_NET_KIND_DIRECT = 1,
} PmsmNetKind;

/**
 * Machine model with the operating-point grid and post-processing settings
 * used by the classical and hybrid paths.
 */
typedef struct PmsmModel PmsmModel;

/**
 * A loaded network checkpoint.
 */
typedef struct PmsmSurrogate PmsmSurrogate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t pmsm_last_error_message(char *buf, size_t len);

/**
 * Default machine with the 6 x 6 grid and 15 waveform steps.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
PmsmStatus pmsm_model_new_default(PmsmModel **out);

/**
 * Default machine with a custom operating-point grid.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
PmsmStatus pmsm_model_new(size_t n_amplitudes, size_t n_angles, size_t n_steps, PmsmModel **out);

/**
 * # Safety
 * `m` must be null or a pointer from `pmsm_model_new*` not yet freed.
 */
void pmsm_model_free(PmsmModel *m);

/**
 * Length of the design vector.
 *
 * # Safety
 * `m` must be a live model handle or null (returns 0).
 */
size_t pmsm_model_design_dim(const PmsmModel *m);

/**
 * Writes the midpoint design into `out` (`len >= design_dim`).
 *
 * # Safety
 * `m` must be a live model handle; `out` valid for `len` doubles.
 */
PmsmStatus pmsm_model_midpoint(const PmsmModel *m, double *out, size_t len);

/**
 * Runs the analytic model at one operating point. `torque` receives
 * `n_steps` samples, `flux` three phase waveforms back to back
 * (`3 n_steps`), `losses` the four per-period energies in the order eddy
 * rotor, eddy stator, hysteresis rotor, hysteresis stator.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
PmsmStatus pmsm_simulate(const PmsmModel *m,
                         const double *design_vec,
                         size_t design_len,
                         double current,
                         double alpha_deg,
                         size_t n_steps,
                         double *torque,
                         double *flux,
                         double *losses);

/**
 * KPIs `z1..z7` from the analytic model through the post-processor.
 *
 * # Safety
 * `kpis` must be valid for 7 doubles, `design_vec` for `design_len`.
 */
PmsmStatus pmsm_classical_kpis(const PmsmModel *m,
                               const double *design_vec,
                               size_t design_len,
                               double *kpis);

/**
 * Loads a checkpoint file.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` valid for one write.
 */
PmsmStatus pmsm_surrogate_load(const char *path, PmsmSurrogate **out);

/**
 * # Safety
 * `s` must be null or a pointer from `pmsm_surrogate_load` not yet freed.
 */
void pmsm_surrogate_free(PmsmSurrogate *s);

/**
 * # Safety
 * `s` must be a live surrogate handle.
 */
PmsmNetKind pmsm_surrogate_kind(const PmsmSurrogate *s);

/**
 * # Safety
 * `s` must be a live surrogate handle or null (returns 0).
 */
size_t pmsm_surrogate_input_dim(const PmsmSurrogate *s);

/**
 * # Safety
 * `s` must be a live surrogate handle or null (returns 0).
 */
size_t pmsm_surrogate_output_dim(const PmsmSurrogate *s);

/**
 * Raw network prediction in physical units. `x` is row-major
 * `n_rows x input_dim`; `out` receives row-major `n_rows x output_dim`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
PmsmStatus pmsm_surrogate_predict(const PmsmSurrogate *s,
                                  const double *x,
                                  size_t n_rows,
                                  size_t n_cols,
                                  double *out,
                                  size_t out_len);

/**
 * KPIs through a hybrid network: predicted measures on the model grid, then
 * the post-processor.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `kpis` for 7 doubles.
 */
PmsmStatus pmsm_hybrid_kpis(const PmsmModel *m,
                            const PmsmSurrogate *s,
                            const double *design_vec,
                            size_t design_len,
                            double *kpis);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PMSM_H */
