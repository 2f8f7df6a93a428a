#ifndef MAXWELL_DEMON_H
#define MAXWELL_DEMON_H

/* Generated by cbindgen. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DemonStatus {
  DEMON_STATUS_OK = 0,
  DEMON_STATUS_NULL_POINTER = 1,
  DEMON_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The photon cutoff is too small for the requested temperature.
   */
  DEMON_STATUS_TRUNCATION = 3,
  DEMON_STATUS_NUMERIC = 4,
  DEMON_STATUS_PANIC = 5,
} DemonStatus;

/**
 * Protocol parameters. Created by [`demon_config_new`].
 */
typedef struct DemonConfig DemonConfig;

/**
 * Result of [`demon_sweep`].
 */
typedef struct DemonSweep DemonSweep;

/**
 * Flat copy of the main report quantities, in nats and photons.
 */
typedef struct DemonReport {
  bool demon_on;
  double p_e;
  double n_th;
  double delta_beta;
  double delta_beta_tilde;
  double heat_q;
  double heat_c;
  double mean_photon_number;
  double i_qc_d_readout;
  double i_qc_d_feedback;
  double delta_i_qc_d;
  double delta_s_qdc;
  double d_q;
  double d_c;
  double d_qc;
  double entropy_production;
  double generalized_slt;
  double residual;
  double heat_gain;
} DemonReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * New configuration with the default parameters. Never returns null.
 */
struct DemonConfig *demon_config_new(void);

/**
 * # Safety
 * `cfg` must come from [`demon_config_new`] and not be used afterwards.
 */
void demon_config_free(struct DemonConfig *cfg);

/**
 * Sets a numeric parameter by name: `p_e`, `n_th`, `n_max`, `eta_readout`,
 * `t_flight`, `t_atom`, `t_cav`, `n_env`, `eps_det`, `p_det`, `relax_split`.
 *
 * # Safety
 * `cfg` must be a live handle and `key` a NUL-terminated string.
 */
enum DemonStatus demon_config_set_f64(struct DemonConfig *cfg, const char *key, double value);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum DemonStatus demon_config_set_demon(struct DemonConfig *cfg, bool demon_on);

/**
 * Switches every imperfection channel off (or back on).
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DemonStatus demon_config_set_ideal(struct DemonConfig *cfg, bool ideal);

/**
 * Runs the protocol once and writes the report to `out`.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum DemonStatus demon_run(const struct DemonConfig *cfg, struct DemonReport *out);

/**
 * Demon and no-demon runs over `points` values of `delta_beta_tilde`
 * evenly spaced in `[-span, span]`. `p_e` of `cfg` is ignored.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable. Release the result with
 * [`demon_sweep_free`].
 */
enum DemonStatus demon_sweep(const struct DemonConfig *cfg,
                             size_t points,
                             double span,
                             struct DemonSweep **out);

/**
 * Number of grid points; 0 for a null handle.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
size_t demon_sweep_len(const struct DemonSweep *sweep);

/**
 * Report at grid `index`, ordered by increasing `delta_beta_tilde`.
 *
 * # Safety
 * `sweep` must be a live handle and `out` writable.
 */
enum DemonStatus demon_sweep_get(const struct DemonSweep *sweep,
                                 size_t index,
                                 bool demon_on,
                                 struct DemonReport *out);

/**
 * # Safety
 * `sweep` must come from [`demon_sweep`] and not be used afterwards.
 */
void demon_sweep_free(struct DemonSweep *sweep);

/**
 * Finite-shot emulation. Writes plug-in estimates to `estimate` and their
 * bootstrap standard errors (same field layout) to `std_error`, which may
 * be null.
 *
 * # Safety
 * `cfg` must be a live handle; `estimate` writable; `std_error` null or
 * writable.
 */
enum DemonStatus demon_mc_estimate(const struct DemonConfig *cfg,
                                   uint64_t shots,
                                   uint64_t seed,
                                   size_t resamples,
                                   struct DemonReport *estimate,
                                   struct DemonReport *std_error);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *demon_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *demon_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXWELL_DEMON_H */
