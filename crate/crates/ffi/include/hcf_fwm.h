#ifndef HCF_FWM_H
#define HCF_FWM_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HcfStatus {
  HCF_STATUS_OK = 0,
  HCF_STATUS_NULL_POINTER = 1,
  HCF_STATUS_CONFIG = 2,
  HCF_STATUS_PARSE = 3,
  HCF_STATUS_NUMERICAL = 4,
  HCF_STATUS_DOMAIN = 5,
  HCF_STATUS_IO = 6,
  HCF_STATUS_BUFFER_TOO_SMALL = 7,
  HCF_STATUS_INVALID_ARGUMENT = 8,
  HCF_STATUS_PANIC = 9,
} HcfStatus;

typedef enum HcfFieldRole {
  HCF_FIELD_ROLE_PUMP = 0,
  HCF_FIELD_ROLE_STOKES = 1,
  HCF_FIELD_ROLE_PROBE = 2,
} HcfFieldRole;

/**
 * Opaque conversion configuration.
 */
typedef struct HcfConfig HcfConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty if none.
 */
const char *hcf_last_error_message(void);

/**
 * Reference configuration (938/1538/863 nm, hydrogen, 27 cm fiber).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HcfStatus hcf_config_new_reference(struct HcfConfig **out);

/**
 * Loads a TOML run configuration.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum HcfStatus hcf_config_load(const char *path, struct HcfConfig **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void hcf_config_free(struct HcfConfig *cfg);

/**
 * Replaces the three input wavelengths, keeping powers. The signal is re-derived.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum HcfStatus hcf_config_set_wavelengths(struct HcfConfig *cfg,
                                          double pump_nm,
                                          double stokes_nm,
                                          double probe_nm);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum HcfStatus hcf_config_set_power(struct HcfConfig *cfg, enum HcfFieldRole role, double power_w);

/**
 * # Safety
 * `cfg` must be a live handle; `out` writable.
 */
enum HcfStatus hcf_config_signal_wavelength(const struct HcfConfig *cfg, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum HcfStatus hcf_signal_wavelength(double pump_nm,
                                     double stokes_nm,
                                     double probe_nm,
                                     double *out);

/**
 * Phase mismatch at a uniform pressure, rad/m.
 *
 * # Safety
 * `cfg` must be a live handle; `out` writable.
 */
enum HcfStatus hcf_delta_beta(const struct HcfConfig *cfg, double pressure_bar, double *out);

/**
 * Conversion efficiency in arbitrary units at a uniform pressure.
 *
 * # Safety
 * `cfg` must be a live handle; `out` writable.
 */
enum HcfStatus hcf_efficiency(const struct HcfConfig *cfg, double pressure_bar, double *out);

/**
 * Phase-matching factor for a linear pressure drop along the fiber.
 *
 * # Safety
 * `cfg` must be a live handle; `out` writable.
 */
enum HcfStatus hcf_gradient_factor(const struct HcfConfig *cfg,
                                   double inlet_bar,
                                   double outlet_bar,
                                   double *out);

/**
 * Uniform-pressure sweep into caller buffers of length `len`, which must equal
 * `steps`. Invalid grid points get `valid[i] = 0` and efficiency 0.
 *
 * # Safety
 * `cfg` must be a live handle; each buffer must hold `len` elements.
 */
enum HcfStatus hcf_pressure_sweep(const struct HcfConfig *cfg,
                                  double p_min,
                                  double p_max,
                                  uintptr_t steps,
                                  double *pressure,
                                  double *efficiency,
                                  uint8_t *valid,
                                  uintptr_t len);

/**
 * # Safety
 * `cfg` must be a live handle; outputs writable.
 */
enum HcfStatus hcf_optimize_pressure(const struct HcfConfig *cfg,
                                     double p_min,
                                     double p_max,
                                     double *out_pressure,
                                     double *out_efficiency);

/**
 * Non-paralyzable dead-time correction.
 *
 * # Safety
 * `out` must be writable.
 */
enum HcfStatus hcf_dead_time_correct(double measured_cps, double dead_time_s, double *out);

/**
 * State fidelity `(1 + V) / 2` from a fringe visibility.
 *
 * # Safety
 * `out` must be writable.
 */
enum HcfStatus hcf_fidelity_from_visibility(double visibility, double *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hcf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HCF_FWM_H */
