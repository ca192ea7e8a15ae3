//! Orbit geometry: stationary points, region minima of `G`, turning points,
//! the pointer half-width bound and Poincaré-section periods.

use super::field::{landscape, rhs};
use super::integrator::Trajectory;
use super::state::{PhaseState, Region};
use crate::{Error, Result};

/// Outer-region constant as printed alongside the half-width formula.
pub const PRINTED_OUTER_CONSTANT: f64 = 1.62105;
/// Inner-region constant as printed alongside the half-width formula.
pub const PRINTED_INNER_CONSTANT: f64 = 1.22552;

/// The four fixed points `(±√(5 ± √17)/2, 0)` of the reduced flow, ordered by `Q`.
pub fn stationary_points() -> [(f64, f64); 4] {
    let outer = (5.0 + 17f64.sqrt()).sqrt() / 2.0;
    let inner = (5.0 - 17f64.sqrt()).sqrt() / 2.0;
    [(-outer, 0.0), (-inner, 0.0), (inner, 0.0), (outer, 0.0)]
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Numerically minimizes `f(Q) = Q² − ln|Q| − ln|Q² − 1|` over the positive
/// half of `region`. Returns `(Q_min, f_min)`.
pub fn region_minimum(region: Region) -> (f64, f64) {
    let (a, b) = match region {
        Region::Inner => (1e-9, 1.0 - 1e-9),
        Region::Outer => (1.0 + 1e-9, 10.0),
    };
    let q = golden_section(landscape, a, b);
    (q, landscape(q))
}

fn exact_region_constant(region: Region) -> f64 {
    let pts = stationary_points();
    match region {
        Region::Inner => landscape(pts[2].0),
        Region::Outer => landscape(pts[3].0),
    }
}

/// Pointer half-width in the form printed with the region constants:
/// `2√(2(G_max − c))`.
///
/// On a contour `G = Y′²/2 + f(Q)` the largest `|Y′|` is reached where `f` is
/// minimal, which gives `√(2(G_max − c))`; that bound is what trajectories
/// actually attain (see [`half_width_bound_derived`]). This function keeps the
/// printed factor of two.
pub fn half_width_bound(g_max: f64, region: Region) -> Result<f64> {
    let c = match region {
        Region::Inner => PRINTED_INNER_CONSTANT,
        Region::Outer => PRINTED_OUTER_CONSTANT,
    };
    if !(g_max >= c) {
        return Err(Error::invalid(
            "g_max",
            format!("{g_max} is below the {} minimum {c}", region.as_str()),
        ));
    }
    Ok(2.0 * (2.0 * (g_max - c)).sqrt())
}

/// `√(2(G_max − c))` with the exact region minimum `c`. This is the largest
/// `|Y′|` reachable on or inside the contour.
pub fn half_width_bound_derived(g_max: f64, region: Region) -> Result<f64> {
    let c = exact_region_constant(region);
    if !(g_max >= c) {
        return Err(Error::invalid(
            "g_max",
            format!("{g_max} is below the {} minimum {c}", region.as_str()),
        ));
    }
    Ok((2.0 * (g_max - c)).sqrt())
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive-`Q` crossings of the contour `G = g` with the axis `Y′ = 0`,
/// returned as `(inside, outside)` around the region's stationary point.
pub fn orbit_turning_points(g: f64, region: Region) -> Result<(f64, f64)> {
    let c = exact_region_constant(region);
    if !(g > c) || !g.is_finite() {
        return Err(Error::invalid(
            "g",
            format!(
                "contour level {g} must exceed the {} minimum {c}",
                region.as_str()
            ),
        ));
    }
    let pts = stationary_points();
    let h = |q: f64| landscape(q) - g;
    let (lo, q_star, hi) = match region {
        Region::Inner => (f64::MIN_POSITIVE, pts[2].0, 1.0),
        Region::Outer => {
            let mut hi = 2.0;
            while h(hi) < 0.0 {
                hi *= 2.0;
            }
            (1.0, pts[3].0, hi)
        }
    };
    // f diverges at the barriers; step inwards until finite and above g
    let mut lo_edge = lo;
    let mut hi_edge = hi;
    let mut eps = 1e-3;
    while !(h(lo_edge) > 0.0 && h(lo_edge).is_finite())
        || !(h(hi_edge) > 0.0 && h(hi_edge).is_finite())
    {
        lo_edge = if region == Region::Inner {
            lo.max(eps)
        } else {
            1.0 + eps
        };
        hi_edge = if region == Region::Inner {
            1.0 - eps
        } else {
            hi
        };
        eps *= 0.1;
        if eps < 1e-300 {
            return Err(Error::invalid("g", "contour too close to a barrier"));
        }
    }
    Ok((bisect(h, lo_edge, q_star), bisect(h, q_star, hi_edge)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOptions {
    /// Maximum `|ΔQ|` between successive section crossings for them to count
    /// as a return.
    pub return_tol: f64,
    /// Below this speed at the start the trajectory is treated as stationary.
    pub stationary_speed: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self {
            return_tol: 1e-3,
            stationary_speed: 1e-12,
        }
    }
}

/// Upward crossings of the section `Y′ = 0` with cubic Hermite interpolation
/// between accepted steps. Returns `(T, Q)` per crossing.
fn section_crossings(traj: &Trajectory) -> Vec<(f64, f64)> {
    let vel = |s: &PhaseState| {
        let mut dy = [0.0; 2];
        rhs(&[s.q, s.yp], &[], &mut dy);
        (dy[0], dy[1])
    };
    let mut out = Vec::new();
    for i in 1..traj.len() {
        let (a, b) = (&traj.states[i - 1], &traj.states[i]);
        if !(a.yp <= 0.0 && b.yp > 0.0) {
            continue;
        }
        let (t0, t1) = (traj.times[i - 1], traj.times[i]);
        let h = t1 - t0;
        let (fa, fb) = (vel(a), vel(b));
        let herm = |s: f64, y0: f64, y1: f64, d0: f64, d1: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * h * d0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * h * d1
        };
        let s = if a.yp == 0.0 {
            0.0
        } else {
            bisect(|s| herm(s, a.yp, b.yp, fa.1, fb.1), 0.0, 1.0)
        };
        out.push((t0 + s * h, herm(s, a.q, b.q, fa.0, fb.0)));
    }
    out
}

/// First-return time to the Poincaré section `Y′ = 0, dY′/dT > 0` of a
/// reduced-flow trajectory.
pub fn detect_period(traj: &Trajectory, opts: &PeriodOptions) -> Result<f64> {
    let Some(first) = traj.states.first() else {
        return Err(Error::NoPeriod("empty trajectory".into()));
    };
    let mut v = [0.0; 2];
    rhs(&[first.q, first.yp], &[], &mut v);
    if v[0].hypot(v[1]) < opts.stationary_speed {
        return Err(Error::NoPeriod("trajectory is stationary".into()));
    }
    let crossings = section_crossings(traj);
    if crossings.len() < 2 {
        return Err(Error::NoPeriod(format!(
            "{} section crossing(s) within T ∈ [{}, {}]",
            crossings.len(),
            traj.times[0],
            traj.times[traj.len() - 1]
        )));
    }
    let (t0, q0) = crossings[0];
    let (t1, q1) = crossings[1];
    if (q1 - q0).abs() > opts.return_tol {
        return Err(Error::NoPeriod(format!(
            "section return misses the start by |ΔQ| = {:e}",
            (q1 - q0).abs()
        )));
    }
    Ok(t1 - t0)
}
