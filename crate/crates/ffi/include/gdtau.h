#ifndef GDTAU_H
#define GDTAU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GdtauCommand {
  GDTAU_COMMAND_VERIFY = 0,
  GDTAU_COMMAND_TAU = 1,
  GDTAU_COMMAND_CONVERGE = 2,
  GDTAU_COMMAND_FACTORIZE = 3,
  GDTAU_COMMAND_SPECTRAL = 4,
} GdtauCommand;

typedef enum GdtauStatus {
  GDTAU_STATUS_OK = 0,
  GDTAU_STATUS_NULL_POINTER = 1,
  GDTAU_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The numerical routine reported an error.
   */
  GDTAU_STATUS_COMPUTATION = 3,
  GDTAU_STATUS_PANIC = 4,
} GdtauStatus;

/**
 * Opaque symbol handle.
 */
typedef struct GdtauSymbol GdtauSymbol;

/**
 * Certificate of the factorization 𝒲(t; z) = T₋T₊.
 */
typedef struct GdtauFactorCertificate {
  size_t band;
  double residual;
  double leakage;
  double cond;
  double det_plus_deviation;
} GdtauFactorCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next gdtau call on the same thread.
 */
const char *gdtau_last_error(void);

/**
 * 𝒲(z) = diag(1 − c_i²/z).
 *
 * # Safety
 * `c_re` (and `c_im` unless null) must point to `len` doubles; `out` must be
 * writable.
 */
enum GdtauStatus gdtau_symbol_rational(const double *c_re,
                                       const double *c_im,
                                       size_t len,
                                       struct GdtauSymbol **out);

/**
 * Symmetric n-covering with branch points a_j.
 *
 * # Safety
 * As for [`gdtau_symbol_rational`].
 */
enum GdtauStatus gdtau_symbol_covering(const double *a_re,
                                       const double *a_im,
                                       size_t len,
                                       size_t n,
                                       struct GdtauSymbol **out);

/**
 * # Safety
 * `symbol` must come from a `gdtau_symbol_*` constructor and not be used
 * afterwards. Null is ignored.
 */
void gdtau_symbol_free(struct GdtauSymbol *symbol);

/**
 * Block size n, or 0 for a null handle.
 *
 * # Safety
 * `symbol` must be null or a live handle.
 */
size_t gdtau_symbol_n(const struct GdtauSymbol *symbol);

/**
 * τ_{W,N}(t) = det T_N(𝒲(t; z)).
 *
 * # Safety
 * `t` must point to `len` doubles; outputs must be writable.
 */
enum GdtauStatus gdtau_tau_numeric(const struct GdtauSymbol *symbol,
                                   const double *t,
                                   size_t len,
                                   size_t blocks,
                                   double *out_re,
                                   double *out_im);

/**
 * Stable τ_W(t) as a Fredholm determinant; `out_err` (nullable) receives
 * the finite-section error estimate.
 *
 * # Safety
 * As for [`gdtau_tau_numeric`].
 */
enum GdtauStatus gdtau_tau_stable(const struct GdtauSymbol *symbol,
                                  const double *t,
                                  size_t len,
                                  double tol,
                                  double *out_re,
                                  double *out_im,
                                  double *out_err);

/**
 * # Safety
 * `t` must point to `len` doubles; `out` must be writable.
 */
enum GdtauStatus gdtau_factorize(const struct GdtauSymbol *symbol,
                                 const double *t,
                                 size_t len,
                                 struct GdtauFactorCertificate *out);

/**
 * Runs a CLI command on a config file. `out_dir` may be null for the usual
 * precedence. `exit_code` receives 0, 1 or 2 as the binary would return.
 *
 * # Safety
 * `config_path` and a non-null `out_dir` must be NUL-terminated UTF-8;
 * `exit_code` must be writable.
 */
enum GdtauStatus gdtau_run(const char *config_path,
                           enum GdtauCommand command,
                           const char *out_dir,
                           uint64_t seed,
                           int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GDTAU_H */
