#ifndef REGFORGE_H
#define REGFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_INVALID_ARGUMENT = 1,
  RF_STATUS_NULL_POINTER = 2,
  RF_STATUS_UNSUPPORTED = 3,
  RF_STATUS_NUMERICAL = 4,
  RF_STATUS_PANIC = 5,
} RfStatus;

typedef enum RfPreset {
  RF_PRESET_EXACT = 0,
  RF_PRESET_PAPER_ROUNDED = 1,
} RfPreset;

/**
 * State-space model handle.
 */
typedef struct RfStateSpace RfStateSpace;

/**
 * Simulated trajectory handle.
 */
typedef struct RfTimeSeries RfTimeSeries;

/**
 * Transfer function handle.
 */
typedef struct RfTransferFunction RfTransferFunction;

typedef struct RfPlantParams {
  double tau_t;
  double k1;
  double n;
  double l_f;
  double r_f;
  double l_a;
  double r_a;
  double r_l;
} RfPlantParams;

typedef struct RfElectricalReport {
  double omega;
  double v_out;
  double i_a;
  double e_g;
  double p_out;
  double p_in;
  double efficiency;
} RfElectricalReport;

/**
 * Step-response metrics. Undefined times are NaN.
 */
typedef struct RfStepMetrics {
  double steady_state;
  double overshoot_pct;
  double settling_time;
  double rise_time;
  bool degenerate;
} RfStepMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rf_last_error_message(void);

/**
 * Reference parameter set of the turbine-generator plant.
 */
struct RfPlantParams rf_plant_params_reference(void);

/**
 * Builds `num(s)/den(s)` from coefficients, highest power first.
 *
 * # Safety
 * `num` and `den` must point to `num_len` and `den_len` readable doubles;
 * `out` must be writable.
 */
enum RfStatus rf_tf_new(const double *num,
                        uintptr_t num_len,
                        const double *den,
                        uintptr_t den_len,
                        struct RfTransferFunction **out);

/**
 * # Safety
 * `tf` must be null or a handle from this library not yet freed.
 */
void rf_tf_free(struct RfTransferFunction *tf);

/**
 * Copies numerator and denominator coefficients. Each `*_len` is set to the
 * required length; nothing is copied into a buffer that is too small (the
 * call then fails with `InvalidArgument`).
 *
 * # Safety
 * Buffers must hold `*_cap` doubles; length pointers must be writable.
 */
enum RfStatus rf_tf_coeffs(const struct RfTransferFunction *tf,
                           double *num,
                           uintptr_t num_cap,
                           uintptr_t *num_len,
                           double *den,
                           uintptr_t den_cap,
                           uintptr_t *den_len);

/**
 * # Safety
 * `tf` must be a live handle and `out` writable.
 */
enum RfStatus rf_tf_dc_gain(const struct RfTransferFunction *tf, double *out);

/**
 * Controllable canonical realization.
 *
 * # Safety
 * `tf` must be a live handle and `out` writable.
 */
enum RfStatus rf_tf_to_ss(const struct RfTransferFunction *tf, struct RfStateSpace **out);

/**
 * Plant transfer function from physical parameters.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum RfStatus rf_plant_tf(const struct RfPlantParams *params,
                          enum RfPreset preset,
                          struct RfTransferFunction **out);

/**
 * Steady electrical operating point for a constant steam flow (g/s).
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum RfStatus rf_steady_state_report(const struct RfPlantParams *params,
                                     double flow,
                                     struct RfElectricalReport *out);

/**
 * State-space model from row-major `a` (n×n), `b` (n×m), `c` (p×n), `d` (p×m).
 *
 * # Safety
 * Each buffer must hold the stated number of doubles; `out` must be writable.
 */
enum RfStatus rf_ss_new(uintptr_t n,
                        uintptr_t m,
                        uintptr_t p,
                        const double *a,
                        const double *b,
                        const double *c,
                        const double *d,
                        struct RfStateSpace **out);

/**
 * # Safety
 * `ss` must be null or a handle from this library not yet freed.
 */
void rf_ss_free(struct RfStateSpace *ss);

/**
 * States, inputs and outputs of a model.
 *
 * # Safety
 * `ss` must be a live handle; the output pointers must be writable.
 */
enum RfStatus rf_ss_dims(const struct RfStateSpace *ss, uintptr_t *n, uintptr_t *m, uintptr_t *p);

/**
 * Copies the four matrices row-major into buffers sized per [`rf_ss_dims`].
 *
 * # Safety
 * `ss` must be a live handle; buffers must be large enough.
 */
enum RfStatus rf_ss_copy(const struct RfStateSpace *ss, double *a, double *b, double *c, double *d);

/**
 * Characteristic polynomial of a row-major n×n matrix; `coeffs` receives
 * n+1 values, highest power first.
 *
 * # Safety
 * `a` must hold n·n doubles and `coeffs` n+1.
 */
enum RfStatus rf_char_poly(uintptr_t n, const double *a, double *coeffs);

/**
 * Routh-Hurwitz test; `out` is true when every root is in the open left
 * half plane.
 *
 * # Safety
 * `coeffs` must hold `len` doubles and `out` be writable.
 */
enum RfStatus rf_is_hurwitz(const double *coeffs, uintptr_t len, bool *out);

/**
 * LQR gain for `(A, B)` with weights `Q` (n×n) and `R` (m×m). `k` receives
 * the m×n gain row-major; `residual` (optional) the Riccati residual norm.
 *
 * # Safety
 * Buffers must hold the stated sizes; `residual` may be null.
 */
enum RfStatus rf_lqr_gain(uintptr_t n,
                          uintptr_t m,
                          const double *a,
                          const double *b,
                          const double *q,
                          const double *r,
                          double *k,
                          double *residual);

/**
 * Single-input pole placement. Poles are given as separate real and
 * imaginary parts and must be closed under conjugation; `k` receives n gains.
 *
 * # Safety
 * `a` must hold n·n doubles, `b`, `poles_re`, `poles_im` and `k` n each.
 */
enum RfStatus rf_place_poles(uintptr_t n,
                             const double *a,
                             const double *b,
                             const double *poles_re,
                             const double *poles_im,
                             double *k);

/**
 * Step response of a SISO model from rest with fixed step `dt`.
 *
 * # Safety
 * `ss` must be a live handle and `out` writable.
 */
enum RfStatus rf_simulate(const struct RfStateSpace *ss,
                          double dt,
                          double duration,
                          double amplitude,
                          struct RfTimeSeries **out);

/**
 * # Safety
 * `ts` must be null or a handle from this library not yet freed.
 */
void rf_series_free(struct RfTimeSeries *ts);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `ts` must be null or a live handle.
 */
uintptr_t rf_series_len(const struct RfTimeSeries *ts);

/**
 * Whether the run stopped early on an unbounded value.
 *
 * # Safety
 * `ts` must be null or a live handle.
 */
bool rf_series_diverged(const struct RfTimeSeries *ts);

/**
 * Copies times, inputs and outputs; any buffer may be null to skip it.
 * Each non-null buffer must hold [`rf_series_len`] doubles.
 *
 * # Safety
 * `ts` must be a live handle; buffers must be large enough.
 */
enum RfStatus rf_series_copy(const struct RfTimeSeries *ts, double *t, double *u, double *y);

/**
 * Overshoot, 2 % settling time and 10-90 % rise time of a step response.
 *
 * # Safety
 * `ts` must be a live handle and `out` writable.
 */
enum RfStatus rf_step_metrics(const struct RfTimeSeries *ts, struct RfStepMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGFORGE_H */
