//! Dormand–Prince 5(4) integration of the guidance flow.
//!
//! The photon-mode amplitude is integrated in a chart that puts the barriers
//! at infinity: `v = ln(Q² − 1)` for `|Q| > 1` and `v = ln(Q²/(1 − Q²))` for
//! `|Q| < 1`, with the sign of `Q` held fixed. Near a barrier the distance to
//! it is then carried with full relative precision, error control tightens on
//! its own and `G` stays well conditioned. The guidance equations become
//!
//! * outer: `dv/dT = −Y′/3`
//! * inner: `dv/dT = (Y′/3)(1 + e^{−v})`
//!
//! with `dY′/dT` unchanged as a function of `Q² `. Steps are rejected and
//! retried smaller whenever a trial state is non-finite. `G` is monitored at
//! every accepted step; if its drift exceeds the budget the whole run is
//! repeated with tolerances ten times tighter, up to `max_refinements` times.

use serde::{Deserialize, Serialize};

use super::state::{ModeSpectrum, PhaseState, Region};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in `T`.
    pub max_step: f64,
    /// Permitted `|ΔG|` per unit `T`.
    pub g_drift_tol: f64,
    pub max_refinements: u32,
    pub max_steps: u64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.5,
            g_drift_tol: 1e-8,
            max_refinements: 2,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("g_drift_tol", self.g_drift_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be > 0"));
        }
        Ok(())
    }

    fn tightened(&self, level: u32) -> Self {
        let f = 10f64.powi(-(level as i32));
        Self {
            rel_tol: self.rel_tol * f,
            abs_tol: self.abs_tol * f,
            ..*self
        }
    }
}

/// Every accepted step of one integration.
///
/// `g_values` holds `NaN` when `G` is undefined (a vacuum amplitude at zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub g_values: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_g_drift(&self) -> f64 {
        let g0 = self.g_values[0];
        self.g_values
            .iter()
            .map(|g| (g - g0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_yp(&self) -> f64 {
        self.states.iter().map(|s| s.yp.abs()).fold(0.0, f64::max)
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Barrier-resolving coordinates for one sign and region of `Q`.
#[derive(Debug, Clone, Copy)]
struct Chart {
    sign: f64,
    region: Region,
}

impl Chart {
    fn of(q: f64) -> Option<Self> {
        Some(Self {
            sign: q.signum(),
            region: Region::of(q)?,
        })
    }

    fn to_chart(self, q: f64) -> f64 {
        let a = q.abs();
        let gap = (a - 1.0).abs() * (a + 1.0);
        match self.region {
            Region::Outer => gap.ln(),
            Region::Inner => 2.0 * a.ln() - gap.ln(),
        }
    }

    /// `(Q², 1/Q²)` from the chart coordinate.
    #[inline]
    fn q_squared(&self, v: f64) -> (f64, f64) {
        match self.region {
            Region::Outer => {
                let p = 1.0 + v.exp();
                (p, 1.0 / p)
            }
            Region::Inner => {
                let inv = 1.0 + (-v).exp();
                (1.0 / inv, inv)
            }
        }
    }

    fn q(&self, v: f64) -> f64 {
        self.sign * self.q_squared(v).0.sqrt()
    }

    fn to_state(self, y: &[f64]) -> PhaseState {
        PhaseState {
            q: self.q(y[0]),
            yp: y[1],
            vacuum: y[2..].to_vec(),
        }
    }

    #[inline]
    fn rhs(&self, y: &[f64], ratios: &[f64], dy: &mut [f64]) {
        let (v, yp) = (y[0], y[1]);
        let (p, inv_p) = self.q_squared(v);
        dy[0] = match self.region {
            Region::Outer => -yp / 3.0,
            Region::Inner => yp / 3.0 * inv_p,
        };
        let mut dyp = inv_p / 6.0 + p / 3.0 - 5.0 / 6.0;
        for (k, &r) in ratios.iter().enumerate() {
            let qk = y[2 + k];
            dyp += r * (qk * qk / 3.0 - 1.0 / 6.0);
            dy[2 + k] = -r * qk * yp / 6.0;
        }
        dy[1] = dyp;
    }

    /// `G` in chart coordinates; `NaN` when a vacuum amplitude is exactly zero.
    fn g(&self, y: &[f64]) -> f64 {
        let (v, yp) = (y[0], y[1]);
        let (p, _) = self.q_squared(v);
        let mut g = 0.5 * yp * yp
            + p
            + match self.region {
                Region::Outer => -0.5 * v.exp().ln_1p() - v,
                Region::Inner => 0.5 * (-v).exp().ln_1p() + v.exp().ln_1p(),
            };
        for &qk in &y[2..] {
            if qk == 0.0 {
                return f64::NAN;
            }
            g += qk * qk - qk.abs().ln();
        }
        g
    }
}

enum Failure {
    Drift {
        time: f64,
        drift: f64,
        q: f64,
        yp: f64,
    },
    Fatal(Error),
}

fn fatal(chart: &Chart, time: f64, y: &[f64], reason: impl Into<String>) -> Failure {
    Failure::Fatal(Error::Integration {
        time,
        q: chart.q(y[0]),
        yp: y[1],
        reason: reason.into(),
    })
}

struct Stepper<'a> {
    chart: Chart,
    ratios: &'a [f64],
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(chart: Chart, ratios: &'a [f64], dim: usize) -> Self {
        Self {
            chart,
            ratios,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
        }
    }

    /// One trial step from `y` with `k[0] = f(y)` already in place. Leaves the
    /// 5th-order solution in `ynew`, `f(ynew)` in `k[6]` and returns the
    /// scaled error norm.
    fn trial(&mut self, y: &[f64], h: f64, s: &IntegratorSettings) -> f64 {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        self.chart.rhs(tmp, self.ratios, k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.chart.rhs(tmp, self.ratios, k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.chart.rhs(tmp, self.ratios, k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.chart.rhs(tmp, self.ratios, k5);
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.chart.rhs(tmp, self.ratios, k6);
        for i in 0..n {
            self.ynew[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        self.chart.rhs(&self.ynew, self.ratios, k7);
        let mut acc = 0.0;
        for i in 0..n {
            let err =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = s.abs_tol + s.rel_tol * y[i].abs().max(self.ynew[i].abs());
            acc += (err / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    }
}

fn initial_step(y: &[f64], f: &[f64], s: &IntegratorSettings) -> f64 {
    let n = y.len() as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for (yi, fi) in y.iter().zip(f) {
        let sc = s.abs_tol + s.rel_tol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 || !d1.is_finite() {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(s.max_step)
}

/// Integrates from `t0` through every time in `stops` (strictly increasing,
/// all ≥ `t0`), calling `on_stop` at each and `on_step` after every accepted
/// step.
#[allow(clippy::too_many_arguments)]
fn run(
    chart: Chart,
    y0: &[f64],
    t0: f64,
    stops: &[f64],
    s: &IntegratorSettings,
    ratios: &[f64],
    drift_budget: f64,
    mut on_step: impl FnMut(f64, &[f64], f64),
    mut on_stop: impl FnMut(usize, &[f64]),
) -> std::result::Result<(), Failure> {
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let g0 = chart.g(&y);
    let monitored = !g0.is_nan();
    if g0.is_infinite() || !y.iter().all(|v| v.is_finite()) {
        return Err(fatal(
            &chart,
            t,
            &y,
            "initial state is singular or non-finite",
        ));
    }
    let mut st = Stepper::new(chart, ratios, dim);
    chart.rhs(&y, ratios, &mut st.k[0]);
    let mut h = initial_step(&y, &st.k[0], s);
    let mut steps: u64 = 0;
    let mut last_rejected = false;

    for (idx, &stop) in stops.iter().enumerate() {
        while t < stop {
            if steps >= s.max_steps {
                return Err(fatal(
                    &chart,
                    t,
                    &y,
                    format!("exceeded {} steps", s.max_steps),
                ));
            }
            steps += 1;
            let remaining = stop - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let h_try = if landing { remaining } else { h };
            if h_try < 8.0 * f64::EPSILON * t.abs().max(1.0) && !landing {
                return Err(fatal(
                    &chart,
                    t,
                    &y,
                    format!("step size underflow (h = {h_try:e})"),
                ));
            }

            let err = st.trial(&y, h_try, s);
            let finite = err.is_finite()
                && st.ynew.iter().all(|v| v.is_finite())
                && st.k[6].iter().all(|v| v.is_finite());
            if !finite {
                h = h_try * 0.25;
                last_rejected = true;
                continue;
            }
            if err > 1.0 {
                h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
                last_rejected = true;
                continue;
            }

            t = if landing { stop } else { t + h_try };
            y.copy_from_slice(&st.ynew);
            let (head, tail) = st.k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);

            let g = chart.g(&y);
            let drift = (g - g0).abs();
            if monitored && !(drift <= drift_budget) {
                return Err(Failure::Drift {
                    time: t,
                    drift,
                    q: chart.q(y[0]),
                    yp: y[1],
                });
            }
            on_step(t, &y, g);

            let growth = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let growth = if last_rejected {
                growth.min(1.0)
            } else {
                growth
            };
            last_rejected = false;
            // keep the natural step across forced landings
            let natural = if landing {
                h.max(h_try)
            } else {
                h_try * growth
            };
            h = natural.min(s.max_step);
        }
        on_stop(idx, &y);
    }
    Ok(())
}

fn prepare(
    state: &PhaseState,
    settings: &IntegratorSettings,
    modes: &ModeSpectrum,
) -> Result<(Chart, Vec<f64>)> {
    settings.validate()?;
    modes.check(state)?;
    if !state.is_finite() {
        return Err(Error::Singular("non-finite state".into()));
    }
    let Some(chart) = Chart::of(state.q) else {
        return Err(Error::Singular(format!(
            "Q = {} lies on a barrier",
            state.q
        )));
    };
    let mut y = Vec::with_capacity(state.dim());
    state.to_flat(&mut y);
    y[0] = chart.to_chart(state.q);
    if !y[0].is_finite() {
        return Err(Error::Singular(format!(
            "Q = {} is too close to a barrier",
            state.q
        )));
    }
    Ok((chart, y))
}

fn with_refinement<T>(
    settings: &IntegratorSettings,
    mut attempt: impl FnMut(&IntegratorSettings) -> std::result::Result<T, Failure>,
) -> Result<T> {
    let mut last = None;
    for level in 0..=settings.max_refinements {
        match attempt(&settings.tightened(level)) {
            Ok(v) => return Ok(v),
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::Drift { time, drift, q, yp }) => last = Some((time, drift, q, yp)),
        }
    }
    let (time, drift, q, yp) = last.expect("at least one attempt");
    Err(Error::Integration {
        time,
        q,
        yp,
        reason: format!(
            "|ΔG| = {drift:e} exceeds budget after {} refinements",
            settings.max_refinements
        ),
    })
}

/// Integrates `state` over a duration `t_end`, recording every accepted step.
///
/// The trajectory starts at `T = 0`.
pub fn integrate(
    state: &PhaseState,
    t_end: f64,
    settings: &IntegratorSettings,
    modes: &ModeSpectrum,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid("t_end", format!("must be > 0, got {t_end}")));
    }
    let (chart, y0) = prepare(state, settings, modes)?;
    let budget = settings.g_drift_tol * t_end;
    with_refinement(settings, |s| {
        let mut traj = Trajectory {
            times: vec![0.0],
            states: vec![state.clone()],
            g_values: vec![chart.g(&y0)],
        };
        run(
            chart,
            &y0,
            0.0,
            &[t_end],
            s,
            modes.ratios(),
            budget,
            |t, y, g| {
                traj.times.push(t);
                traj.states.push(chart.to_state(y));
                traj.g_values.push(g);
            },
            |_, _| {},
        )?;
        Ok(traj)
    })
}

/// Integrates `state` from `t_start` and returns the state at every time in
/// `times` (strictly increasing, each ≥ `t_start`).
pub fn integrate_to_times(
    state: &PhaseState,
    t_start: f64,
    times: &[f64],
    settings: &IntegratorSettings,
    modes: &ModeSpectrum,
) -> Result<Vec<PhaseState>> {
    validate_times(t_start, times)?;
    let (chart, y0) = prepare(state, settings, modes)?;
    let Some(&t_last) = times.last() else {
        return Ok(Vec::new());
    };
    let budget = settings.g_drift_tol * (t_last - t_start);
    with_refinement(settings, |s| {
        let mut out = Vec::with_capacity(times.len());
        run(
            chart,
            &y0,
            t_start,
            times,
            s,
            modes.ratios(),
            budget,
            |_, _, _| {},
            |idx, y| {
                // zero-duration snapshots return the input bit-for-bit
                out.push(if times[idx] == t_start {
                    state.clone()
                } else {
                    chart.to_state(y)
                })
            },
        )?;
        Ok(out)
    })
}

pub(crate) fn validate_times(t_start: f64, times: &[f64]) -> Result<()> {
    if !t_start.is_finite() || t_start < 0.0 {
        return Err(Error::invalid(
            "t_start",
            format!("must be ≥ 0, got {t_start}"),
        ));
    }
    let mut prev = None;
    for &t in times {
        if !t.is_finite() || t < t_start {
            return Err(Error::invalid(
                "times",
                format!("{t} precedes the start time {t_start}"),
            ));
        }
        if let Some(p) = prev {
            if t <= p {
                return Err(Error::invalid("times", "must be strictly increasing"));
            }
        }
        prev = Some(t);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::conserved_g_reduced;

    fn tight() -> IntegratorSettings {
        IntegratorSettings {
            rel_tol: 1e-10,
            ..Default::default()
        }
    }

    #[test]
    fn stationary_point_stays_put() {
        let qs = (5.0 + 17f64.sqrt()).sqrt() / 2.0;
        let traj = integrate(
            &PhaseState::new(qs, 0.0),
            50.0,
            &tight(),
            &ModeSpectrum::empty(),
        )
        .unwrap();
        for s in &traj.states {
            assert!((s.q - qs).abs() < 1e-12 && s.yp.abs() < 1e-12);
        }
    }

    #[test]
    fn long_outer_orbit_conserves_g() {
        let traj = integrate(
            &PhaseState::new(2.0, 0.0),
            1000.0,
            &tight(),
            &ModeSpectrum::empty(),
        )
        .unwrap();
        assert_eq!(*traj.times.last().unwrap(), 1000.0);
        assert!(traj.max_g_drift() < 1e-6, "{}", traj.max_g_drift());
        let g0 = conserved_g_reduced(&traj.states[0]).unwrap();
        let g1 = conserved_g_reduced(traj.states.last().unwrap()).unwrap();
        assert!((g1 - g0).abs() < 1e-6);
    }

    #[test]
    fn inner_orbit_never_crosses_unit_barrier() {
        let traj = integrate(
            &PhaseState::new(0.9, 0.0),
            1000.0,
            &tight(),
            &ModeSpectrum::empty(),
        )
        .unwrap();
        assert!(traj.states.iter().all(|s| s.q.abs() < 1.0 && s.q > 0.0));
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.times.len(), traj.g_values.len());
    }

    #[test]
    fn vacuum_zero_is_fixed() {
        let modes = ModeSpectrum::new(vec![1.0, 0.7]).unwrap();
        let s = PhaseState::with_vacuum(1.8, 0.3, vec![0.0, 0.6]);
        let traj = integrate(&s, 100.0, &tight(), &modes).unwrap();
        assert!(traj.states.iter().all(|s| s.vacuum[0] == 0.0));
    }

    #[test]
    fn snapshots_hit_requested_times() {
        let s = PhaseState::new(1.3, 0.4);
        let times = [0.0, 0.5, 10.0, 33.3];
        let out = integrate_to_times(&s, 0.0, &times, &tight(), &ModeSpectrum::empty()).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out[0], s);
        let traj = integrate(&s, 33.3, &tight(), &ModeSpectrum::empty()).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.q - out[3].q).abs() < 1e-6 && (last.yp - out[3].yp).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let st = tight();
        let m = ModeSpectrum::empty();
        assert!(integrate(&PhaseState::new(1.0, 0.0), 1.0, &st, &m).is_err());
        assert!(integrate(&PhaseState::new(0.0, 0.0), 1.0, &st, &m).is_err());
        assert!(integrate(&PhaseState::new(2.0, 0.0), 0.0, &st, &m).is_err());
        assert!(integrate(&PhaseState::new(2.0, f64::NAN), 1.0, &st, &m).is_err());
        assert!(integrate_to_times(&PhaseState::new(2.0, 0.0), 0.0, &[2.0, 1.0], &st, &m).is_err());
        let bad = IntegratorSettings { rel_tol: 0.0, ..st };
        assert!(integrate(&PhaseState::new(2.0, 0.0), 1.0, &bad, &m).is_err());
    }

    #[test]
    fn drift_failure_reports_time() {
        let st = IntegratorSettings {
            rel_tol: 1e-3,
            abs_tol: 1e-3,
            max_step: 5.0,
            g_drift_tol: 1e-14,
            max_refinements: 1,
            ..Default::default()
        };
        match integrate(
            &PhaseState::new(3.0, 2.0),
            50.0,
            &st,
            &ModeSpectrum::empty(),
        ) {
            Err(Error::Integration { time, reason, .. }) => {
                assert!(time > 0.0 && time <= 50.0);
                assert!(reason.contains("ΔG"));
            }
            other => panic!("expected drift failure, got {other:?}"),
        }
    }
}
