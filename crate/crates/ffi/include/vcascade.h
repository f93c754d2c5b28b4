#ifndef VCASCADE_H
#define VCASCADE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the non-zero engine codes match the command-line exit codes.
 */
typedef enum {
  VC_STATUS_OK = 0,
  VC_STATUS_INVALID_ARGUMENT = 2,
  VC_STATUS_PROJECTION_FLOOR = 3,
  VC_STATUS_TRUNCATION = 4,
  VC_STATUS_NUMERICAL = 5,
  VC_STATUS_NULL_POINTER = 6,
  VC_STATUS_OUT_OF_RANGE = 7,
  VC_STATUS_PANIC = 8,
} VcStatus;

typedef enum {
  VC_NONLINEARITY_ONE = 0,
  VC_NONLINEARITY_SQRT = 1,
} VcNonlinearity;

/**
 * Result of a two-atom run.
 */
typedef struct VcCascade VcCascade;

/**
 * Coupling, detuning and nonlinearity in scaled units (`lambda2 = 1`).
 */
typedef struct VcParams VcParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *vc_last_error_message(void);

/**
 * Engine version as a static NUL-terminated string.
 */
const char *vc_version(void);

/**
 * Creates a parameter set; `*out` receives the handle.
 */
VcStatus vc_params_new(double lambda1,
                       double delta1,
                       double delta2,
                       VcNonlinearity nonlinearity,
                       VcParams **out);

/**
 * Releases a parameter handle; null is ignored.
 */
void vc_params_free(VcParams *params);

/**
 * Coherent field with mean photon number `alpha_sq`, first atom for `tau1`,
 * detection in `|g>`, second atom sampled at `tau2[0..n_tau2]`.
 * `tail_tol` sets the Fock truncation (`<= 0` selects the default `1e-12`).
 */
VcStatus vc_cascade_run(const VcParams *params,
                        double alpha_sq,
                        double tau1,
                        const double *tau2,
                        uintptr_t n_tau2,
                        double tail_tol,
                        VcCascade **out);

/**
 * Releases a cascade handle; null is ignored.
 */
void vc_cascade_free(VcCascade *cascade);

/**
 * Number of second-passage samples (0 for a null handle).
 */
uintptr_t vc_cascade_len(const VcCascade *cascade);

/**
 * Fock cutoff used for the initial field (0 for a null handle).
 */
uintptr_t vc_cascade_n_max(const VcCascade *cascade);

/**
 * Probability of the ground-state detection that conditioned the field.
 */
VcStatus vc_cascade_probability(const VcCascade *cascade, double *out);

/**
 * Atomic inversion of sample `index`.
 */
VcStatus vc_cascade_inversion(const VcCascade *cascade, uintptr_t index, double *out);

/**
 * Atom-field entanglement entropy (natural log) of sample `index`.
 */
VcStatus vc_cascade_entropy(const VcCascade *cascade, uintptr_t index, double *out);

/**
 * Mandel Q of sample `index`.
 */
VcStatus vc_cascade_mandel_q(const VcCascade *cascade, uintptr_t index, double *out);

/**
 * Quadrature squeezing of sample `index`; `order` is 1 (normal) or 2 (amplitude-squared).
 */
VcStatus vc_cascade_squeezing(const VcCascade *cascade,
                              uintptr_t index,
                              uint32_t order,
                              double *s_x,
                              double *s_p);

/**
 * Wigner function of sample `index` on the square grid `[-half_width, half_width]^2`
 * with `resolution` points per axis. `values` must hold `resolution^2` doubles and
 * is filled row by row over the imaginary axis: `values[j*resolution + i]`.
 */
VcStatus vc_cascade_wigner(const VcCascade *cascade,
                           uintptr_t index,
                           double half_width,
                           uintptr_t resolution,
                           double *values,
                           uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VCASCADE_H */
