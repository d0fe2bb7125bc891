#ifndef SPINBELL_H
#define SPINBELL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_INVALID_ARGUMENT = 2,
  SB_STATUS_SIZE_LIMIT = 3,
  SB_STATUS_NOT_CONVERGED = 4,
  SB_STATUS_ODD_CHAIN = 5,
  SB_STATUS_EMPTY_SECTOR = 6,
  SB_STATUS_BUFFER_TOO_SMALL = 7,
  SB_STATUS_IO = 8,
  SB_STATUS_PANIC = 9,
} SbStatus;

/**
 * Opaque ground state.
 */
typedef struct SbGroundState SbGroundState;

/**
 * Weights `f_n = |f_n| e^{iθ_n}` and total phase angle; the conjugation
 * pattern is the alternating one.
 */
typedef struct SbWeights {
  double f1_mag;
  double f2_mag;
  double theta1;
  double theta2;
  double theta_nu;
} SbWeights;

typedef struct SbBellResult {
  double g1;
  double g2;
  /**
   * NaN when the correlators vanish.
   */
  double f_ratio;
  double bell;
  double beta_lr;
  double ratio;
} SbBellResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; empty after a
 * success. Valid until the next call into the library.
 */
const char *sb_last_error_message(void);

/**
 * Library version, static string.
 */
const char *sb_version(void);

/**
 * The maximizing weights for `n` sites at ratio `f_ratio`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SbStatus sb_weights_maximizing(size_t n, double f_ratio, struct SbWeights *out);

/**
 * Ground state of the `n`-site chain in the `Mz = 0` sector. `tol <= 0`
 * selects the default tolerance.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum SbStatus sb_ground_state_new(size_t n,
                                  double jz,
                                  double d,
                                  bool periodic,
                                  double tol,
                                  uint64_t seed,
                                  struct SbGroundState **out);

/**
 * # Safety
 * `state` must be null or a handle from [`sb_ground_state_new`] not yet
 * freed.
 */
void sb_ground_state_free(struct SbGroundState *state);

/**
 * # Safety
 * `state` must be a live handle; `energy` valid for writes.
 */
enum SbStatus sb_ground_state_energy(const struct SbGroundState *state, double *energy);

/**
 * Whether the flip-odd sector is degenerate with the ground state.
 *
 * # Safety
 * `state` must be a live handle; `degenerate` valid for writes.
 */
enum SbStatus sb_ground_state_degenerate(const struct SbGroundState *state, bool *degenerate);

/**
 * Sector dimension, the length needed by the copy functions.
 *
 * # Safety
 * `state` must be a live handle; `dim` valid for writes.
 */
enum SbStatus sb_ground_state_dim(const struct SbGroundState *state, size_t *dim);

/**
 * Copies the amplitudes and their base-3 packed configurations (site 0
 * most significant). Either buffer may be null.
 *
 * # Safety
 * Non-null buffers must hold `len` elements.
 */
enum SbStatus sb_ground_state_copy(const struct SbGroundState *state,
                                   double *amplitudes,
                                   uint32_t *configs,
                                   size_t len);

/**
 * Entropy of sites `0..cut`, natural log.
 *
 * # Safety
 * `state` must be a live handle; `entropy` valid for writes.
 */
enum SbStatus sb_entanglement_entropy(const struct SbGroundState *state,
                                      size_t cut,
                                      double *entropy);

/**
 * # Safety
 * `state` must be a live handle, `w` readable, `bell` valid for writes.
 */
enum SbStatus sb_bell_correlation(const struct SbGroundState *state,
                                  const struct SbWeights *w,
                                  double *bell);

/**
 * Optimal `f̃` in `(0, f_max]` at the maximizing angles.
 *
 * # Safety
 * `state` must be a live handle; `out` valid for writes.
 */
enum SbStatus sb_optimize_weight_ratio(const struct SbGroundState *state,
                                       double f_max,
                                       size_t points,
                                       struct SbBellResult *out);

/**
 * Local-realistic bound for `n` parties (exact dynamic program).
 *
 * # Safety
 * `w` readable; `bound` valid for writes.
 */
enum SbStatus sb_lr_bound(size_t n, const struct SbWeights *w, double *bound);

/**
 * `b` and the restricted-operator eigenvalue of ψ_max.
 *
 * # Safety
 * `b` and `eigenvalue` valid for writes.
 */
enum SbStatus sb_psi_max(size_t n, double f_ratio, double *b, double *eigenvalue);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINBELL_H */
