#ifndef PILOTLINE_H
#define PILOTLINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_ARGUMENT = 2,
  // A coordinate lies on a singular manifold (`Q ∈ {−1, 0, 1}`).
  PL_STATUS_SINGULAR = 3,
  // Trajectory integration failed.
  PL_STATUS_INTEGRATION = 4,
  PL_STATUS_LENGTH_MISMATCH = 5,
  // A Rust panic was caught; this is a bug.
  PL_STATUS_INTERNAL = 6,
} PlStatus;

// Opaque seeded ensemble of phase-space points.
typedef struct PlEnsemble PlEnsemble;

// Adaptive integrator settings; obtain defaults from [`pl_integrator_defaults`].
typedef struct PlIntegratorSettings {
  double rel_tol;
  double abs_tol;
  double max_step;
  // Permitted `|ΔG|` per unit `T`.
  double g_drift_tol;
  uint32_t max_refinements;
  uint64_t max_steps;
} PlIntegratorSettings;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`) and returns the full message length
// including the terminator. Pass `buf = NULL` to query the length.
//
// # Safety
// `buf` must be null or valid for writes of `len` bytes.
size_t pl_last_error_message(char *buf, size_t len);

// Default integrator settings.
struct PlIntegratorSettings pl_integrator_defaults(void);

// Born density `|ψ(Q, Y′)|²`.
double pl_equilibrium_density(double q, double yp);

// Widened density `|ψ(Q/w, Y′)|²/w`.
//
// # Safety
// `out` must be null or valid for a write.
enum PlStatus pl_widened_density(double q, double yp, double w, double *out);

// Reduced guidance velocity `(dQ/dT, dY′/dT)` at `(Q, Y′)`.
//
// # Safety
// `out_dq` and `out_dyp` must be null or valid for a write.
enum PlStatus pl_velocity(double q, double yp, double *out_dq, double *out_dyp);

// Conserved function `G = Y′²/2 + Q² − ln|Q| − ln|Q² − 1|`.
//
// # Safety
// `out` must be null or valid for a write.
enum PlStatus pl_conserved_g(double q, double yp, double *out);

// The four stationary points of the reduced flow, ordered by `Q`.
//
// # Safety
// `out_q` and `out_yp` must be null or valid for writes of 4 doubles.
enum PlStatus pl_stationary_points(double *out_q, double *out_yp);

// Energy-dispersion density `D(E | E_γ)` for resolution `T`.
//
// # Safety
// `out` must be null or valid for a write.
enum PlStatus pl_dispersion_pdf(double energy, double e_gamma, double t, double *out);

// Recorded energy `E_γ(1 + Y′/T)` for pointer reading `Y′`.
//
// # Safety
// `out` must be null or valid for a write.
enum PlStatus pl_pointer_to_energy(double yp, double e_gamma, double t, double *out);

// Samples `n` points from the widened density with `n_vacuum` vacuum
// amplitudes each (`w = 1` is the Born distribution). The result is a
// deterministic function of `(n, w, n_vacuum, seed)`.
//
// # Safety
// `out` must be null or valid for a write of a handle pointer.
enum PlStatus pl_ensemble_sample(size_t n,
                                 double w,
                                 size_t n_vacuum,
                                 uint64_t seed,
                                 struct PlEnsemble **out);

// Releases an ensemble. Null is ignored.
//
// # Safety
// `ensemble` must be null or a handle from this library not yet freed.
void pl_ensemble_free(struct PlEnsemble *ensemble);

// Number of points; 0 for a null handle.
//
// # Safety
// `ensemble` must be null or a live handle.
size_t pl_ensemble_size(const struct PlEnsemble *ensemble);

// Vacuum amplitudes per point; 0 for a null handle.
//
// # Safety
// `ensemble` must be null or a live handle.
size_t pl_ensemble_vacuum_len(const struct PlEnsemble *ensemble);

// Current rescaled time `T` of the ensemble.
//
// # Safety
// `ensemble` must be null or a live handle; `out` null or writable.
enum PlStatus pl_ensemble_time(const struct PlEnsemble *ensemble, double *out);

// Copies the `Q` and `Y′` coordinates into caller arrays of length `len`,
// which must equal the ensemble size. Either array may be null to skip it.
//
// # Safety
// `ensemble` must be null or a live handle; non-null arrays must be valid
// for `len` writes.
enum PlStatus pl_ensemble_coordinates(const struct PlEnsemble *ensemble,
                                      double *q_out,
                                      double *yp_out,
                                      size_t len);

// Evolves every point to time `t` (≥ the ensemble's current time) and
// returns a new handle. `ratios` holds one frequency ratio per vacuum mode
// (`n_ratios` must equal the vacuum length; `ratios` may be null when it is
// 0). `settings` may be null for defaults. Results do not depend on the
// number of worker threads.
//
// # Safety
// `ensemble` must be a live handle, `ratios` valid for `n_ratios` reads,
// `settings` null or valid, `out` valid for a write.
enum PlStatus pl_ensemble_evolve(const struct PlEnsemble *ensemble,
                                 double t,
                                 const double *ratios,
                                 size_t n_ratios,
                                 const struct PlIntegratorSettings *settings,
                                 struct PlEnsemble **out);

// Density histogram of `Y′` over `[lo, hi]` with `bins` bins, written to
// `densities` (length `bins`); the mass outside the range goes to
// `out_of_range` (may be null).
//
// # Safety
// `ensemble` must be a live handle, `densities` valid for `bins` writes,
// `out_of_range` null or writable.
enum PlStatus pl_ensemble_yp_histogram(const struct PlEnsemble *ensemble,
                                       size_t bins,
                                       double lo,
                                       double hi,
                                       double *densities,
                                       double *out_of_range);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PILOTLINE_H */
