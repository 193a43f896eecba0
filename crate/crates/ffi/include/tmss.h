/* C interface to the tmss truncated Fock-space library. Generated from the tmss-ffi crate; do not edit by hand. */

#ifndef TMSS_H
#define TMSS_H



#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum TmssStatus {
  /**
   * The call succeeded and the out-parameters are valid.
   */
  TMSS_STATUS_OK = 0,
  /**
   * A pointer was null or a parameter sat outside its domain.
   */
  TMSS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The quantity has no value at these parameters (for example the
   * second-order coherence of the vacuum, or the odd state at zero
   * squeezing). Not an input error.
   */
  TMSS_STATUS_UNDEFINED = 2,
  /**
   * A numerical guard tripped: truncation overflow, norm drift, or a
   * degenerate normalization. The inputs were plausible; the truncated
   * computation could not be completed faithfully.
   */
  TMSS_STATUS_NUMERICAL = 3,
  /**
   * A panic was caught at the language boundary. No state is leaked, but
   * treat the library instance as suspect and report the message.
   */
  TMSS_STATUS_PANIC = 4,
} TmssStatus;

/**
 * State family selector mirroring the library's reduced-state menu.
 */
typedef enum TmssFamily {
  /**
   * Thermal state; reduced state of the plain two-mode squeezed vacuum.
   */
  TMSS_FAMILY_THERMAL = 0,
  /**
   * Reduced state of the even two-mode superposition.
   */
  TMSS_FAMILY_EVEN = 1,
  /**
   * Reduced state of the odd two-mode superposition.
   */
  TMSS_FAMILY_ODD = 2,
  /**
   * Single-mode squeezed vacuum (pure).
   */
  TMSS_FAMILY_SMSS = 3,
} TmssFamily;

/**
 * Opaque reduced single-mode state in its truncated Fock space.
 */
typedef struct TmssReducedState TmssReducedState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never free it.
 */
const char *tmss_version(void);

/**
 * Copies the most recent error message of this thread into `buf` (up to
 * `cap - 1` bytes plus a NUL) and returns the full message length in bytes.
 * Pass a null `buf` or zero `cap` to query the length alone. The message is
 * only meaningful directly after a non-Ok status.
 */
uintptr_t tmss_last_error_message(char *buf, uintptr_t cap);

/**
 * Builds the reduced state of `family` at squeezing parameter `lambda`
 * (lambda = tanh^2 r) on a Fock space sized so the neglected geometric tail
 * stays below `tail_tol`. On success writes a heap handle through `out`;
 * release it with `tmss_reduced_state_free`.
 */
enum TmssStatus tmss_reduced_state_new(enum TmssFamily family,
                                       double lambda,
                                       double tail_tol,
                                       struct TmssReducedState **out);

/**
 * Releases a handle from `tmss_reduced_state_new`. A null pointer is a
 * harmless no-op; anything else must come from this library exactly once.
 */
void tmss_reduced_state_free(struct TmssReducedState *state);

/**
 * Dimension of the truncated Fock space backing the state (cutoff + 1).
 */
enum TmssStatus tmss_reduced_state_dim(const struct TmssReducedState *state, uintptr_t *out);

/**
 * Mean occupation number of the state.
 */
enum TmssStatus tmss_reduced_state_mean_n(const struct TmssReducedState *state, double *out);

/**
 * Second-order coherence g2(0) of the state; `Undefined` when the mean
 * occupation vanishes.
 */
enum TmssStatus tmss_reduced_state_g2(const struct TmssReducedState *state, double *out);

/**
 * Purity tr(rho^2) of the state.
 */
enum TmssStatus tmss_reduced_state_purity(const struct TmssReducedState *state, double *out);

/**
 * Population of Fock level `n`; `InvalidArgument` beyond the cutoff.
 */
enum TmssStatus tmss_reduced_state_population(const struct TmssReducedState *state,
                                              uintptr_t n,
                                              double *out);

/**
 * Wigner function at the phase-space point (q, p), with the convention
 * alpha = q + i p. Number-diagonal families use the alternating Laguerre
 * sum; the squeezed vacuum goes through the displaced parity expectation.
 * Accuracy degrades once q^2 + p^2 approaches the space's cutoff.
 */
enum TmssStatus tmss_reduced_state_wigner(const struct TmssReducedState *state,
                                          double q,
                                          double p,
                                          double *out);

/**
 * Quantum Fisher information for displacement along the quadrature at
 * `angle` (radians; 0 is the q axis).
 */
enum TmssStatus tmss_reduced_state_qfi(const struct TmssReducedState *state,
                                       double angle,
                                       double *out);

/**
 * Excited-to-ground inversion read by a carrier probe pulse after kicking
 * the state by alpha = alpha_re + i alpha_im. `eta_x` is the probe
 * Lamb-Dicke parameter and `omega` the carrier Rabi frequency.
 */
enum TmssStatus tmss_reduced_state_probe(const struct TmssReducedState *state,
                                         double alpha_re,
                                         double alpha_im,
                                         double eta_x,
                                         double omega,
                                         double *out);

/**
 * Closed-form g2(0) of a family at `lambda`; `Undefined` where the family
 * carries no photons.
 */
enum TmssStatus tmss_g2_closed(enum TmssFamily family, double lambda, double *out);

/**
 * Closed-form mean occupation of a family at `lambda`.
 */
enum TmssStatus tmss_mean_n_closed(enum TmssFamily family, double lambda, double *out);

/**
 * Closed-form Wigner function of the thermal, even, or odd family at the
 * point (q, p). The squeezed vacuum has no closed form here; query it
 * through a state handle instead.
 */
enum TmssStatus tmss_wigner_closed(enum TmssFamily family,
                                   double lambda,
                                   double q,
                                   double p,
                                   double *out);

/**
 * Linear-entropy entanglement of the plain two-mode squeezed vacuum.
 */
enum TmssStatus tmss_entanglement_tmss(double lambda, double *out);

/**
 * Linear-entropy entanglement of the superposition with relative phase
 * `phi` (radians).
 */
enum TmssStatus tmss_entanglement_superposition(double lambda, double phi, double *out);

/**
 * Linear-entropy entanglement shared by the even and odd members.
 */
enum TmssStatus tmss_entanglement_even_odd(double lambda, double *out);

/**
 * Squeezing parameter lambda at which the phi-superposition is exactly as
 * entangled as the plain pair state; `Undefined` when the two curves never
 * cross for this phase.
 */
enum TmssStatus tmss_entanglement_boundary(double phi, double *out);

/**
 * Probability of heralding the odd member from a pair state at `lambda`,
 * and the heralded state's single-pair weight.
 */
enum TmssStatus tmss_odd_projection_stats(double lambda,
                                          double *out_p_project,
                                          double *out_p_single);

/**
 * Interference contrast of the carrier probe, cos(2 Phi); zero exactly at
 * the blind spots where 1/eta_x^2 is an integer.
 */
enum TmssStatus tmss_probe_contrast(double eta_x, double omega, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TMSS_H */
