//! Seeded nonequilibrium ensembles and their deterministic evolution.
//!
//! Point `i` of an ensemble with master seed `s` draws all of its random
//! numbers from ChaCha20 stream `i` keyed by `s`, so the sample does not
//! depend on how (or in which order) points are generated. Evolution runs one
//! independent integration per point on the current rayon pool.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_to_times, IntegratorSettings, ModeSpectrum, PhaseState};
use crate::spectra::{SpectrumHistogram, Units};
use crate::{Error, Result};

/// Minimum distance from `Q ∈ {−1, 0, 1}` for a freshly sampled point.
pub const BARRIER_MARGIN: f64 = 1e-8;

/// Default ensemble size.
pub const DEFAULT_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    points: Vec<PhaseState>,
    w: f64,
    t_now: f64,
    seed: u64,
}

impl Ensemble {
    pub fn points(&self) -> &[PhaseState] {
        &self.points
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn t_now(&self) -> f64 {
        self.t_now
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn vacuum_len(&self) -> usize {
        self.points.first().map_or(0, |p| p.vacuum.len())
    }

    pub fn q_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.q).collect()
    }

    pub fn yp_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.yp).collect()
    }

    /// Wraps externally prepared points.
    pub fn from_points(points: Vec<PhaseState>, w: f64, t_now: f64, seed: u64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("points", "ensemble must not be empty"));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid("w", format!("must be > 0, got {w}")));
        }
        if !(t_now.is_finite() && t_now >= 0.0) {
            return Err(Error::invalid("t_now", format!("must be ≥ 0, got {t_now}")));
        }
        let nv = points[0].vacuum.len();
        if let Some(p) = points.iter().find(|p| p.vacuum.len() != nv) {
            return Err(Error::LengthMismatch {
                what: "point.vacuum",
                got: p.vacuum.len(),
                expected: nv,
            });
        }
        Ok(Self {
            points,
            w,
            t_now,
            seed,
        })
    }
}

fn point_rng(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sample_point(seed: u64, index: usize, w: f64, n_vacuum: usize) -> PhaseState {
    // |Q|² ~ Gamma(3/2, 1) reproduces (2/√π) Q² e^{−Q²}
    let gamma = Gamma::new(1.5, 1.0).expect("valid gamma parameters");
    // vacuum ground state |χ₀|² = e^{−Q²}/√π
    let vacuum = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let mut rng = point_rng(seed, index);
    let yp: f64 = StandardNormal.sample(&mut rng);
    let q = loop {
        let x: f64 = gamma.sample(&mut rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let q = w * sign * x.sqrt();
        if q.abs() >= BARRIER_MARGIN && (q.abs() - 1.0).abs() >= BARRIER_MARGIN {
            break q;
        }
    };
    let vacuum = (0..n_vacuum)
        .map(|_| loop {
            let v: f64 = vacuum.sample(&mut rng);
            if v != 0.0 {
                break v;
            }
        })
        .collect();
    PhaseState::with_vacuum(q, yp, vacuum)
}

/// Draws `n` points from the widened density `|ψ(Q/w, Y′)|²/w`, with
/// `n_vacuum` vacuum amplitudes per point drawn from their ground state.
pub fn sample(n: usize, w: f64, n_vacuum: usize, seed: u64) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::invalid("n", "ensemble size must be > 0"));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::invalid(
            "w",
            format!("must be finite and > 0, got {w}"),
        ));
    }
    let points = (0..n)
        .into_par_iter()
        .map(|i| sample_point(seed, i, w, n_vacuum))
        .collect();
    Ok(Ensemble {
        points,
        w,
        t_now: 0.0,
        seed,
    })
}

pub fn sample_equilibrium(n: usize, seed: u64) -> Result<Ensemble> {
    sample(n, 1.0, 0, seed)
}

pub fn sample_widened(n: usize, w: f64, seed: u64) -> Result<Ensemble> {
    sample(n, w, 0, seed)
}

/// One ensemble per requested time, all evolved from the same initial points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSet {
    pub times: Vec<f64>,
    pub ensembles: Vec<Ensemble>,
}

impl SnapshotSet {
    pub fn at(&self, t: f64) -> Option<&Ensemble> {
        self.times
            .iter()
            .position(|&x| x == t)
            .map(|i| &self.ensembles[i])
    }
}

/// Evolves every point of `ensemble` to each of `times`.
///
/// Any failing point aborts the whole run; the error names the lowest failing
/// index, which makes the report independent of scheduling.
pub fn evolve_to_snapshots(
    ensemble: &Ensemble,
    times: &[f64],
    settings: &IntegratorSettings,
    modes: &ModeSpectrum,
) -> Result<SnapshotSet> {
    crate::dynamics::validate_times(ensemble.t_now, times)?;
    settings.validate()?;
    if modes.len() != ensemble.vacuum_len() {
        return Err(Error::LengthMismatch {
            what: "mode ratios",
            got: modes.len(),
            expected: ensemble.vacuum_len(),
        });
    }
    let results: Vec<Result<Vec<PhaseState>>> = ensemble
        .points
        .par_iter()
        .map(|p| integrate_to_times(p, ensemble.t_now, times, settings, modes))
        .collect();

    let mut per_point = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(states) => per_point.push(states),
            Err(e) => {
                return Err(Error::PointFailed {
                    index,
                    seed: ensemble.seed,
                    source: Box::new(e),
                })
            }
        }
    }

    let ensembles = times
        .iter()
        .enumerate()
        .map(|(k, &t)| Ensemble {
            points: per_point.iter().map(|s| s[k].clone()).collect(),
            w: ensemble.w,
            t_now: t,
            seed: ensemble.seed,
        })
        .collect();
    Ok(SnapshotSet {
        times: times.to_vec(),
        ensembles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Q,
    Yp,
}

/// Density-normalized histogram of one coordinate.
pub fn marginal_histogram(
    ensemble: &Ensemble,
    axis: Axis,
    bins: usize,
    range: (f64, f64),
) -> Result<SpectrumHistogram> {
    if ensemble.points.is_empty() {
        return Err(Error::invalid("ensemble", "empty ensemble"));
    }
    let (values, units) = match axis {
        Axis::Q => (ensemble.q_values(), Units::Field),
        Axis::Yp => (ensemble.yp_values(), Units::Pointer),
    };
    SpectrumHistogram::from_samples(&values, bins, range, units)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_keyed_per_point() {
        let a = sample_equilibrium(200, 7).unwrap();
        let b = sample_equilibrium(200, 7).unwrap();
        assert_eq!(a, b);
        let small = sample_equilibrium(50, 7).unwrap();
        assert_eq!(&a.points()[..50], small.points());
        let c = sample_equilibrium(200, 8).unwrap();
        assert_ne!(a.points()[0], c.points()[0]);
    }

    #[test]
    fn unit_width_equals_equilibrium() {
        let a = sample_equilibrium(500, 3).unwrap();
        let b = sample_widened(500, 1.0, 3).unwrap();
        assert_eq!(a.points(), b.points());
    }

    #[test]
    fn widening_scales_q_only() {
        let a = sample_equilibrium(300, 11).unwrap();
        let b = sample_widened(300, 2.0, 11).unwrap();
        for (p, r) in a.points().iter().zip(b.points()) {
            assert_eq!(p.yp, r.yp);
            assert_eq!(2.0 * p.q, r.q);
        }
    }

    #[test]
    fn samples_avoid_barriers() {
        let e = sample_widened(5000, 0.25, 5).unwrap();
        for p in e.points() {
            assert!(p.barrier_distance() >= BARRIER_MARGIN);
        }
    }

    #[test]
    fn invalid_sampling_inputs() {
        assert!(sample_equilibrium(0, 1).is_err());
        assert!(sample_widened(10, 0.0, 1).is_err());
        assert!(sample_widened(10, -2.0, 1).is_err());
    }

    #[test]
    fn zero_duration_is_identity() {
        let e = sample_widened(64, 2.0, 9).unwrap();
        let snaps = evolve_to_snapshots(
            &e,
            &[0.0],
            &IntegratorSettings::default(),
            &ModeSpectrum::empty(),
        )
        .unwrap();
        assert_eq!(snaps.ensembles[0].points(), e.points());
        assert_eq!(snaps.ensembles[0].t_now(), 0.0);
    }

    #[test]
    fn bad_times_and_modes_rejected() {
        let e = sample_widened(8, 2.0, 9).unwrap();
        let st = IntegratorSettings::default();
        assert!(evolve_to_snapshots(&e, &[5.0, 1.0], &st, &ModeSpectrum::empty()).is_err());
        assert!(evolve_to_snapshots(&e, &[1.0], &st, &ModeSpectrum::uniform(2)).is_err());
    }

    #[test]
    fn failure_names_lowest_point() {
        let pts = vec![
            PhaseState::new(1.5, 0.0),
            PhaseState::new(2.0, 1.0),
            PhaseState::new(3.0, -1.0),
        ];
        let e = Ensemble::from_points(pts, 1.0, 0.0, 42).unwrap();
        let st = IntegratorSettings {
            max_steps: 3,
            ..Default::default()
        };
        match evolve_to_snapshots(&e, &[10.0], &st, &ModeSpectrum::empty()) {
            Err(Error::PointFailed { index, seed, .. }) => {
                assert_eq!(index, 0);
                assert_eq!(seed, 42);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_histogram() {
        let pts = vec![PhaseState::new(2.0, 0.33); 10];
        let e = Ensemble::from_points(pts, 1.0, 0.0, 0).unwrap();
        let h = marginal_histogram(&e, Axis::Yp, 10, (-1.0, 1.0)).unwrap();
        let occupied: Vec<_> = h.densities().iter().filter(|d| **d > 0.0).collect();
        assert_eq!(occupied.len(), 1);
        assert!((*occupied[0] - 1.0 / 0.2).abs() < 1e-12);
    }
}
