#ifndef GAGLIARDO_H
#define GAGLIARDO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GagStatus {
  GAG_STATUS_OK = 0,
  /**
   * a required pointer was null
   */
  GAG_STATUS_NULL_POINTER = 1,
  /**
   * invalid input: configuration, parameters, regime or buffer size
   */
  GAG_STATUS_INVALID = 2,
  /**
   * numerical failure: divergent energy, cusp, stalled descent
   */
  GAG_STATUS_NUMERICAL = 3,
  GAG_STATUS_IO = 4,
  GAG_STATUS_PANIC = 5,
} GagStatus;

/**
 * Opaque jump configuration.
 */
typedef struct GagConfiguration GagConfiguration;

/**
 * Opaque (s, p, T, d) parameter set.
 */
typedef struct GagParams GagParams;

typedef struct GagEnergyReport {
  double value;
  double tail_lower;
  double tail_upper;
  double abs_err_est;
  uint64_t nodes;
} GagEnergyReport;

typedef struct GagDescentSummary {
  uint64_t iters;
  double final_energy;
  double final_grad_inf;
  /**
   * 1 when the gradient tolerance was reached
   */
  int32_t converged;
  /**
   * largest deviation of a circular gap from 1
   */
  double max_gap_deviation;
} GagDescentSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *gag_last_error_message(void);

/**
 * Configuration from `n` points (n must equal the period T).
 *
 * # Safety
 * `points` must hold `n` values; `out` must be writable.
 */
enum GagStatus gag_config_new(const double *points,
                              size_t n,
                              uint32_t period,
                              struct GagConfiguration **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GagStatus gag_config_equispaced(uint32_t period, struct GagConfiguration **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GagStatus gag_config_random(uint32_t period,
                                 double min_gap,
                                 uint64_t seed,
                                 struct GagConfiguration **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards; null is ignored.
 */
void gag_config_free(struct GagConfiguration *config);

/**
 * Number of points, 0 for null.
 *
 * # Safety
 * `config` must be a live handle or null.
 */
size_t gag_config_len(const struct GagConfiguration *config);

/**
 * Copies the sorted points into `out` (capacity `len`).
 *
 * # Safety
 * `config` must be a live handle; `out` must hold `len` values.
 */
enum GagStatus gag_config_points(const struct GagConfiguration *config, double *out, size_t len);

/**
 * # Safety
 * `out` must be writable.
 */
enum GagStatus gag_params_new(double s,
                              double p,
                              uint32_t period,
                              uint32_t d,
                              struct GagParams **out);

/**
 * # Safety
 * `params` must come from this library and not be used afterwards; null is ignored.
 */
void gag_params_free(struct GagParams *params);

/**
 * Energy of the configuration sawtooth (sub-critical s p < 1).
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GagStatus gag_energy(const struct GagConfiguration *config,
                          const struct GagParams *params,
                          double tol,
                          struct GagEnergyReport *out);

/**
 * Limit energy at s = 0 (closed form).
 *
 * # Safety
 * `config` must be live; `out` must be writable.
 */
enum GagStatus gag_energy_zero(const struct GagConfiguration *config, double p, double *out);

/**
 * Energy of the sawtooth mollified at radius `eps`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GagStatus gag_mollified_energy(const struct GagConfiguration *config,
                                    const struct GagParams *params,
                                    double eps,
                                    double tol,
                                    struct GagEnergyReport *out);

/**
 * Gradient in the jump positions; `eps > 0` selects the mollified energy.
 *
 * # Safety
 * Handles must be live; `out` must hold `len >= T` values.
 */
enum GagStatus gag_gradient(const struct GagConfiguration *config,
                            const struct GagParams *params,
                            double eps,
                            double *out,
                            size_t len);

/**
 * Hessian, row-major T x T; `eps > 0` selects the mollified energy.
 *
 * # Safety
 * Handles must be live; `out` must hold `len >= T*T` values.
 */
enum GagStatus gag_hessian(const struct GagConfiguration *config,
                           const struct GagParams *params,
                           double eps,
                           double *out,
                           size_t len);

/**
 * Projected descent from `config`. `eps > 0` runs the mollified energy with the
 * 4 eps floor. The final configuration is returned as a new handle.
 *
 * # Safety
 * Handles must be live; `out_config` and `out_summary` must be writable.
 */
enum GagStatus gag_optimize(const struct GagConfiguration *config,
                            const struct GagParams *params,
                            double eps,
                            double grad_tol,
                            uint64_t max_iters,
                            struct GagConfiguration **out_config,
                            struct GagDescentSummary *out_summary);

/**
 * Writes 1 to `out` if every circular gap is within `tol` of 1, else 0.
 *
 * # Safety
 * `config` must be live; `out` must be writable.
 */
enum GagStatus gag_verify_equispaced(const struct GagConfiguration *config,
                                     double tol,
                                     int32_t *out);

/**
 * d omega_d / (p T^d).
 */
double gag_limit_constant_s0(uint32_t d, double p, uint32_t period);

/**
 * K_{d,p}.
 */
double gag_limit_constant_s1(uint32_t d, double p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAGLIARDO_H */
