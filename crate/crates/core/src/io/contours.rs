//! Closed orbits traced along level sets of `G`, and the Born density on a grid.

use crate::dynamics::{
    detect_period, integrate, integrate_to_times, orbit_turning_points, IntegratorSettings,
    ModeSpectrum, PeriodOptions, PhaseState, Region,
};
use crate::quantum_state::equilibrium_density;
use crate::{Error, Result};

use super::config::DensityGrid;

/// One closed polyline of the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub region: Region,
    /// Sign of `Q` on the orbit.
    pub sign: f64,
    pub level: f64,
    pub period: f64,
    /// Vertices at `T = k·period/(n−1)`, `k = 0..n`; the last repeats the first
    /// up to integration error.
    pub vertices: Vec<PhaseState>,
}

const FIRST_WINDOW: f64 = 100.0;
const LAST_WINDOW: f64 = 1.0e5;

/// Traces the orbit `G = level` in `region` on the side `sign` of `Q = 0`,
/// starting at its outer turning point on `Y′ = 0`.
pub fn trace_orbit(
    level: f64,
    region: Region,
    sign: f64,
    vertices: usize,
    settings: &IntegratorSettings,
) -> Result<Orbit> {
    if vertices < 3 {
        return Err(Error::invalid(
            "vertices",
            "need at least 3 polyline vertices",
        ));
    }
    let sign = if sign < 0.0 { -1.0 } else { 1.0 };
    let (_, outside) = orbit_turning_points(level, region)?;
    let start = PhaseState::new(sign * outside, 0.0);
    let modes = ModeSpectrum::empty();

    let mut window = FIRST_WINDOW;
    let period = loop {
        let traj = integrate(&start, window, settings, &modes)?;
        match detect_period(&traj, &PeriodOptions::default()) {
            Ok(p) => break p,
            Err(Error::NoPeriod(_)) if window < LAST_WINDOW => window *= 4.0,
            Err(e) => return Err(e),
        }
    };
    let n = vertices - 1;
    let times: Vec<f64> = (0..=n).map(|k| period * k as f64 / n as f64).collect();
    let vertices = integrate_to_times(&start, 0.0, &times, settings, &modes)?;
    Ok(Orbit {
        region,
        sign,
        level,
        period,
        vertices,
    })
}

/// Born density `|ψ(Q, Y′)|²` at the nodes of `grid`, row-major in `Q`
/// then `Y′`, as `(Q, Y′, density)`.
pub fn density_field(grid: &DensityGrid) -> Vec<(f64, f64, f64)> {
    let node = |lo: f64, hi: f64, n: usize, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(grid.q_nodes * grid.yp_nodes);
    for i in 0..grid.q_nodes {
        let q = node(grid.q_min, grid.q_max, grid.q_nodes, i);
        for j in 0..grid.yp_nodes {
            let yp = node(grid.yp_min, grid.yp_max, grid.yp_nodes, j);
            out.push((q, yp, equilibrium_density(q, yp)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::conserved_g_reduced;

    #[test]
    fn orbit_stays_on_its_level_and_closes() {
        let s = IntegratorSettings::default();
        for (region, level) in [(Region::Outer, 2.0), (Region::Inner, 1.6)] {
            for sign in [-1.0, 1.0] {
                let orbit = trace_orbit(level, region, sign, 50, &s).unwrap();
                assert_eq!(orbit.vertices.len(), 50);
                for v in &orbit.vertices {
                    assert!((conserved_g_reduced(v).unwrap() - level).abs() < 1e-7);
                    assert_eq!(Region::of(v.q), Some(region));
                    assert_eq!(v.q.signum(), sign);
                }
                let (a, b) = (&orbit.vertices[0], orbit.vertices.last().unwrap());
                assert!((a.q - b.q).abs() < 1e-5 && (a.yp - b.yp).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn density_grid_covers_the_requested_nodes() {
        let g = DensityGrid {
            q_min: -1.0,
            q_max: 1.0,
            q_nodes: 3,
            yp_min: 0.0,
            yp_max: 2.0,
            yp_nodes: 2,
        };
        let f = density_field(&g);
        assert_eq!(f.len(), 6);
        assert_eq!((f[0].0, f[0].1), (-1.0, 0.0));
        assert_eq!((f[5].0, f[5].1), (1.0, 2.0));
        // density vanishes on the excited-mode node Q = 0
        assert_eq!(f[2].2, 0.0);
    }
}
