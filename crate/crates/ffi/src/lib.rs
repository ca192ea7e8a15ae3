//! C ABI for `pilotline`.
//!
//! Every fallible function returns a [`PlStatus`] and writes its results
//! through out-pointers. On failure a human-readable message is kept per
//! thread and can be copied out with [`pl_last_error_message`]. Ensembles are
//! opaque [`PlEnsemble`] handles that must be released with
//! [`pl_ensemble_free`]. Panics never cross the boundary; they are reported
//! as [`PlStatus::Internal`].

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use pilotline::dynamics::{conserved_g_reduced, stationary_points, velocity_reduced};
use pilotline::ensemble::{evolve_to_snapshots, marginal_histogram, sample, Axis, Ensemble};
use pilotline::quantum_state::{equilibrium_density, widened_density};
use pilotline::{DispersionModel, Error, IntegratorSettings, ModeSpectrum, PhaseState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A coordinate lies on a singular manifold (`Q ∈ {−1, 0, 1}`).
    Singular = 3,
    /// Trajectory integration failed.
    Integration = 4,
    LengthMismatch = 5,
    /// A Rust panic was caught; this is a bug.
    Internal = 6,
}

/// Adaptive integrator settings; obtain defaults from [`pl_integrator_defaults`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlIntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Permitted `|ΔG|` per unit `T`.
    pub g_drift_tol: f64,
    pub max_refinements: u32,
    pub max_steps: u64,
}

impl From<PlIntegratorSettings> for IntegratorSettings {
    fn from(s: PlIntegratorSettings) -> Self {
        IntegratorSettings {
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            max_step: s.max_step,
            g_drift_tol: s.g_drift_tol,
            max_refinements: s.max_refinements,
            max_steps: s.max_steps,
        }
    }
}

/// Opaque seeded ensemble of phase-space points.
pub struct PlEnsemble {
    inner: Ensemble,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> PlStatus {
    match err {
        Error::Singular(_) => PlStatus::Singular,
        Error::Integration { .. } | Error::PointFailed { .. } | Error::NoPeriod(_) => {
            PlStatus::Integration
        }
        Error::LengthMismatch { .. } => PlStatus::LengthMismatch,
        _ => PlStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (PlStatus, String)>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PlStatus::Internal
        }
    }
}

fn lift(e: Error) -> (PlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PlStatus, String) {
    (PlStatus::NullPointer, format!("`{what}` is null"))
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn put<T>(out: *mut T, what: &str, value: T) -> Result<(), (PlStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and valid per the caller's contract
    unsafe { out.write(value) };
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length
/// including the terminator. Pass `buf = NULL` to query the length.
///
/// # Safety
/// `buf` must be null or valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes at `buf`
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Default integrator settings.
#[no_mangle]
pub extern "C" fn pl_integrator_defaults() -> PlIntegratorSettings {
    let d = IntegratorSettings::default();
    PlIntegratorSettings {
        rel_tol: d.rel_tol,
        abs_tol: d.abs_tol,
        max_step: d.max_step,
        g_drift_tol: d.g_drift_tol,
        max_refinements: d.max_refinements,
        max_steps: d.max_steps,
    }
}

/// Born density `|ψ(Q, Y′)|²`.
#[no_mangle]
pub extern "C" fn pl_equilibrium_density(q: f64, yp: f64) -> f64 {
    equilibrium_density(q, yp)
}

/// Widened density `|ψ(Q/w, Y′)|²/w`.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pl_widened_density(q: f64, yp: f64, w: f64, out: *mut f64) -> PlStatus {
    guard(|| {
        let d = widened_density(q, yp, w).map_err(lift)?;
        // SAFETY: forwarded caller contract
        unsafe { put(out, "out", d) }
    })
}

/// Reduced guidance velocity `(dQ/dT, dY′/dT)` at `(Q, Y′)`.
///
/// # Safety
/// `out_dq` and `out_dyp` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pl_velocity(
    q: f64,
    yp: f64,
    out_dq: *mut f64,
    out_dyp: *mut f64,
) -> PlStatus {
    guard(|| {
        if out_dq.is_null() || out_dyp.is_null() {
            return Err(null("out_dq/out_dyp"));
        }
        let (dq, dyp) = velocity_reduced(&PhaseState::new(q, yp)).map_err(lift)?;
        // SAFETY: both checked non-null; validity is the caller's contract
        unsafe {
            put(out_dq, "out_dq", dq)?;
            put(out_dyp, "out_dyp", dyp)
        }
    })
}

/// Conserved function `G = Y′²/2 + Q² − ln|Q| − ln|Q² − 1|`.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pl_conserved_g(q: f64, yp: f64, out: *mut f64) -> PlStatus {
    guard(|| {
        let g = conserved_g_reduced(&PhaseState::new(q, yp)).map_err(lift)?;
        // SAFETY: forwarded caller contract
        unsafe { put(out, "out", g) }
    })
}

/// The four stationary points of the reduced flow, ordered by `Q`.
///
/// # Safety
/// `out_q` and `out_yp` must be null or valid for writes of 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn pl_stationary_points(out_q: *mut f64, out_yp: *mut f64) -> PlStatus {
    guard(|| {
        if out_q.is_null() || out_yp.is_null() {
            return Err(null("out_q/out_yp"));
        }
        for (i, (q, yp)) in stationary_points().into_iter().enumerate() {
            // SAFETY: caller provides 4 writable slots in each array
            unsafe {
                out_q.add(i).write(q);
                out_yp.add(i).write(yp);
            }
        }
        Ok(())
    })
}

/// Energy-dispersion density `D(E | E_γ)` for resolution `T`.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pl_dispersion_pdf(
    energy: f64,
    e_gamma: f64,
    t: f64,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let model = DispersionModel::new(e_gamma, t).map_err(lift)?;
        // SAFETY: forwarded caller contract
        unsafe { put(out, "out", model.dispersion_pdf(energy)) }
    })
}

/// Recorded energy `E_γ(1 + Y′/T)` for pointer reading `Y′`.
///
/// # Safety
/// `out` must be null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pl_pointer_to_energy(
    yp: f64,
    e_gamma: f64,
    t: f64,
    out: *mut f64,
) -> PlStatus {
    guard(|| {
        let model = DispersionModel::new(e_gamma, t).map_err(lift)?;
        // SAFETY: forwarded caller contract
        unsafe { put(out, "out", model.pointer_to_energy(yp)) }
    })
}

/// Samples `n` points from the widened density with `n_vacuum` vacuum
/// amplitudes each (`w = 1` is the Born distribution). The result is a
/// deterministic function of `(n, w, n_vacuum, seed)`.
///
/// # Safety
/// `out` must be null or valid for a write of a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_sample(
    n: usize,
    w: f64,
    n_vacuum: usize,
    seed: u64,
    out: *mut *mut PlEnsemble,
) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = sample(n, w, n_vacuum, seed).map_err(lift)?;
        let handle = Box::into_raw(Box::new(PlEnsemble { inner }));
        // SAFETY: checked non-null above
        unsafe { put(out, "out", handle) }
    })
}

/// Releases an ensemble. Null is ignored.
///
/// # Safety
/// `ensemble` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_free(ensemble: *mut PlEnsemble) {
    if !ensemble.is_null() {
        // SAFETY: handle was created by Box::into_raw and is freed once
        drop(unsafe { Box::from_raw(ensemble) });
    }
}

/// # Safety
/// `ensemble` must be null or a live handle.
unsafe fn borrow<'a>(ensemble: *const PlEnsemble) -> Result<&'a Ensemble, (PlStatus, String)> {
    // SAFETY: caller contract
    unsafe { ensemble.as_ref() }
        .map(|e| &e.inner)
        .ok_or_else(|| null("ensemble"))
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_size(ensemble: *const PlEnsemble) -> usize {
    // SAFETY: caller contract
    unsafe { ensemble.as_ref() }.map_or(0, |e| e.inner.size())
}

/// Vacuum amplitudes per point; 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_vacuum_len(ensemble: *const PlEnsemble) -> usize {
    // SAFETY: caller contract
    unsafe { ensemble.as_ref() }.map_or(0, |e| e.inner.vacuum_len())
}

/// Current rescaled time `T` of the ensemble.
///
/// # Safety
/// `ensemble` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_time(ensemble: *const PlEnsemble, out: *mut f64) -> PlStatus {
    guard(|| {
        // SAFETY: caller contract
        let e = unsafe { borrow(ensemble) }?;
        // SAFETY: caller contract
        unsafe { put(out, "out", e.t_now()) }
    })
}

/// Copies the `Q` and `Y′` coordinates into caller arrays of length `len`,
/// which must equal the ensemble size. Either array may be null to skip it.
///
/// # Safety
/// `ensemble` must be null or a live handle; non-null arrays must be valid
/// for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_coordinates(
    ensemble: *const PlEnsemble,
    q_out: *mut f64,
    yp_out: *mut f64,
    len: usize,
) -> PlStatus {
    guard(|| {
        // SAFETY: caller contract
        let e = unsafe { borrow(ensemble) }?;
        if len != e.size() {
            return lift_len("len", len, e.size());
        }
        for (i, p) in e.points().iter().enumerate() {
            // SAFETY: i < len and the arrays hold len elements
            unsafe {
                if !q_out.is_null() {
                    q_out.add(i).write(p.q);
                }
                if !yp_out.is_null() {
                    yp_out.add(i).write(p.yp);
                }
            }
        }
        Ok(())
    })
}

fn lift_len(what: &'static str, got: usize, expected: usize) -> Result<(), (PlStatus, String)> {
    Err(lift(Error::LengthMismatch {
        what,
        got,
        expected,
    }))
}

/// Evolves every point to time `t` (≥ the ensemble's current time) and
/// returns a new handle. `ratios` holds one frequency ratio per vacuum mode
/// (`n_ratios` must equal the vacuum length; `ratios` may be null when it is
/// 0). `settings` may be null for defaults. Results do not depend on the
/// number of worker threads.
///
/// # Safety
/// `ensemble` must be a live handle, `ratios` valid for `n_ratios` reads,
/// `settings` null or valid, `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_evolve(
    ensemble: *const PlEnsemble,
    t: f64,
    ratios: *const f64,
    n_ratios: usize,
    settings: *const PlIntegratorSettings,
    out: *mut *mut PlEnsemble,
) -> PlStatus {
    guard(|| {
        // SAFETY: caller contract
        let e = unsafe { borrow(ensemble) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ratios = if n_ratios == 0 {
            Vec::new()
        } else if ratios.is_null() {
            return Err(null("ratios"));
        } else {
            // SAFETY: caller provides n_ratios readable doubles
            unsafe { std::slice::from_raw_parts(ratios, n_ratios) }.to_vec()
        };
        let modes = ModeSpectrum::new(ratios).map_err(lift)?;
        // SAFETY: caller contract
        let settings =
            unsafe { settings.as_ref() }.map_or_else(IntegratorSettings::default, |s| (*s).into());
        let mut snaps = evolve_to_snapshots(e, &[t], &settings, &modes).map_err(lift)?;
        let inner = snaps.ensembles.pop().expect("one snapshot requested");
        let handle = Box::into_raw(Box::new(PlEnsemble { inner }));
        // SAFETY: checked non-null above
        unsafe { put(out, "out", handle) }
    })
}

/// Density histogram of `Y′` over `[lo, hi]` with `bins` bins, written to
/// `densities` (length `bins`); the mass outside the range goes to
/// `out_of_range` (may be null).
///
/// # Safety
/// `ensemble` must be a live handle, `densities` valid for `bins` writes,
/// `out_of_range` null or writable.
#[no_mangle]
pub unsafe extern "C" fn pl_ensemble_yp_histogram(
    ensemble: *const PlEnsemble,
    bins: usize,
    lo: f64,
    hi: f64,
    densities: *mut f64,
    out_of_range: *mut f64,
) -> PlStatus {
    guard(|| {
        // SAFETY: caller contract
        let e = unsafe { borrow(ensemble) }?;
        if densities.is_null() {
            return Err(null("densities"));
        }
        let h = marginal_histogram(e, Axis::Yp, bins, (lo, hi)).map_err(lift)?;
        for (i, &d) in h.densities().iter().enumerate() {
            // SAFETY: histogram has exactly `bins` entries
            unsafe { densities.add(i).write(d) };
        }
        if !out_of_range.is_null() {
            // SAFETY: non-null and writable per contract
            unsafe { out_of_range.write(h.out_of_range_mass()) };
        }
        Ok(())
    })
}
