#ifndef QHEAT_H
#define QHEAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result code of every call.
 */
typedef enum QhStatus {
  QH_STATUS_OK = 0,
  QH_STATUS_NULL_POINTER = 1,
  QH_STATUS_INVALID_ARGUMENT = 2,
  QH_STATUS_NOT_HERMITIAN = 3,
  QH_STATUS_NOT_UNITARY = 4,
  QH_STATUS_DIMENSION_MISMATCH = 5,
  QH_STATUS_NO_CONVERGENCE = 6,
  QH_STATUS_DEGENERATE_SPECTRUM = 7,
  QH_STATUS_REQUIRES_THREE_LEVELS = 8,
  QH_STATUS_ZERO_POPULATION = 9,
  QH_STATUS_NOT_NORMALIZED = 10,
  QH_STATUS_BRACKET_NOT_FOUND = 11,
  QH_STATUS_RESIDUAL_TOO_LARGE = 12,
  QH_STATUS_NON_FINITE = 13,
  QH_STATUS_PANIC = 99,
} QhStatus;

/*
 Hamiltonian eigensystem together with the measured observable.
 */
typedef struct QhSystem QhSystem;

/*
 Outcome of a `β_eff` search.
 */
typedef struct QhBetaEff {
  double value;
  double residual;
  /*
   `G'(0)` vanished; `value` is 0.
   */
  bool degenerate;
} QhBetaEff;

/*
 Builds a system from a Hamiltonian and an observable, each given as
 `dim * dim` real and imaginary parts. Imaginary parts may be null.

 # Safety
 Non-null arrays must hold `dim * dim` doubles; `out` must be writable.
 */
enum QhStatus qh_system_new(uintptr_t dim,
                            const double *h_re,
                            const double *h_im,
                            const double *obs_re,
                            const double *obs_im,
                            struct QhSystem **out);

/*
 Spin-1 system `H = w1·Sz + w2·Sx` (or `w1·Sz² + w2·Sx` when `squared`),
 measuring `Sz`.

 # Safety
 `out` must be writable.
 */
enum QhStatus qh_system_spin1(double w1, double w2, bool squared, struct QhSystem **out);

/*
 Releases a system. Null is ignored.

 # Safety
 `sys` must come from a constructor of this library and not be used again.
 */
void qh_system_free(struct QhSystem *sys);

/*
 Hilbert-space dimension, or 0 for a null handle.

 # Safety
 `sys` must be null or a live handle.
 */
uintptr_t qh_system_dim(const struct QhSystem *sys);

/*
 Energy levels in ascending order.

 # Safety
 `out` must hold `len` doubles.
 */
enum QhStatus qh_system_levels(const struct QhSystem *sys, double *out, uintptr_t len);

/*
 Exact joint distribution of first and final energy outcomes for
 waiting times `taus[0..m]`. `out` receives `dim * dim` entries.

 # Safety
 `c` holds `c_len` doubles, `taus` holds `m` doubles, `out` holds `dim * dim`.
 */
enum QhStatus qh_exact_joint(const struct QhSystem *sys,
                             const double *c,
                             uintptr_t c_len,
                             const double *taus,
                             uintptr_t m,
                             double *out);

/*
 Monte Carlo outcome counts with fixed waiting time `tau`. Results are
 identical for any `workers`. `counts` receives `dim * dim` entries.

 # Safety
 `c` holds `c_len` doubles and `counts` holds `dim * dim` integers.
 */
enum QhStatus qh_monte_carlo(const struct QhSystem *sys,
                             const double *c,
                             uintptr_t c_len,
                             double tau,
                             uintptr_t m,
                             uint64_t realizations,
                             uint64_t seed,
                             uintptr_t workers,
                             uint64_t *counts);

/*
 `G(ε) = Σ p[m][n] e^{-ε(E_m - E_n)}` for a joint distribution of
 `p_len = dim * dim` entries.

 # Safety
 `p` holds `p_len` doubles and `out` is writable.
 */
enum QhStatus qh_characteristic(const struct QhSystem *sys,
                                const double *p,
                                uintptr_t p_len,
                                double eps,
                                double *out);

/*
 Nonzero root of `G(β) = 1` for a joint distribution, searched in the
 default range.

 # Safety
 `p` holds `p_len` doubles and `out` is writable.
 */
enum QhStatus qh_beta_eff_joint(const struct QhSystem *sys,
                                const double *p,
                                uintptr_t p_len,
                                struct QhBetaEff *out);

/*
 `β_eff` of the large-`M` limit, where the final state is uniform, for a
 three-level spectrum and initial populations.

 # Safety
 `levels` and `c` hold 3 doubles; `out` is writable.
 */
enum QhStatus qh_beta_eff_closed_form(const double *levels, const double *c, struct QhBetaEff *out);

/*
 Populations `c_k ∝ exp(-βE_k + (α/v)g_k)` of a three-level spectrum.

 # Safety
 `levels` holds 3 doubles and `out` receives 3.
 */
enum QhStatus qh_alphabeta_to_populations(const double *levels,
                                          double alpha,
                                          double beta,
                                          double *out);

/*
 Inverse of [`qh_alphabeta_to_populations`]. All populations must be
 positive.

 # Safety
 `levels` and `c` hold 3 doubles; `alpha` and `beta` are writable.
 */
enum QhStatus qh_populations_to_alphabeta(const double *levels,
                                          const double *c,
                                          double *alpha,
                                          double *beta);

/*
 Message of the last failed call on this thread, or null after a
 success. Valid until the next call on the same thread.
 */
const char *qh_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qh_version(void);

#endif  /* QHEAT_H */
