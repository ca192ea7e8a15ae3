use super::state::{ModeSpectrum, PhaseState};
use crate::{Error, Result};

/// `f(Q) = Q² − ln|Q| − ln|Q² − 1|`, the `Q`-part of the conserved function.
#[inline]
pub fn landscape(q: f64) -> f64 {
    q * q - q.abs().ln() - (q * q - 1.0).abs().ln()
}

fn check_q_nonzero(q: f64) -> Result<()> {
    if q == 0.0 {
        return Err(Error::Singular(
            "velocity field is singular at Q = 0".into(),
        ));
    }
    if !q.is_finite() {
        return Err(Error::Singular(format!("non-finite Q = {q}")));
    }
    Ok(())
}

fn check_q_regular(q: f64) -> Result<()> {
    check_q_nonzero(q)?;
    if q.abs() == 1.0 {
        return Err(Error::Singular(format!("G diverges at Q = {q}")));
    }
    Ok(())
}

#[inline]
fn reduced_unchecked(q: f64, yp: f64) -> (f64, f64) {
    let q2 = q * q;
    (
        yp * (1.0 / q - q) / 6.0,
        1.0 / (6.0 * q2) + q2 / 3.0 - 5.0 / 6.0,
    )
}

/// Reduced guidance velocity `(dQ/dT, dY′/dT)`.
///
/// Vacuum amplitudes, if present, are ignored.
pub fn velocity_reduced(state: &PhaseState) -> Result<(f64, f64)> {
    check_q_nonzero(state.q)?;
    Ok(reduced_unchecked(state.q, state.yp))
}

/// Multi-mode guidance velocity, laid out as `[dQ, dY′, dQ_0, dQ_1, ...]`.
pub fn velocity_full(state: &PhaseState, modes: &ModeSpectrum) -> Result<Vec<f64>> {
    check_q_nonzero(state.q)?;
    modes.check(state)?;
    let mut y = Vec::with_capacity(state.dim());
    state.to_flat(&mut y);
    let mut dy = vec![0.0; y.len()];
    rhs(&y, modes.ratios(), &mut dy);
    Ok(dy)
}

/// Right-hand side on the flat layout. No domain checks.
#[inline]
pub(crate) fn rhs(y: &[f64], ratios: &[f64], dy: &mut [f64]) {
    let (q, yp) = (y[0], y[1]);
    let (dq, mut dyp) = reduced_unchecked(q, yp);
    dy[0] = dq;
    for (k, &r) in ratios.iter().enumerate() {
        let qk = y[2 + k];
        dyp += r * (qk * qk / 3.0 - 1.0 / 6.0);
        dy[2 + k] = -r * qk * yp / 6.0;
    }
    dy[1] = dyp;
}

/// `G = Y′²/2 + Q² − ln|Q| − ln|Q² − 1|`.
pub fn conserved_g_reduced(state: &PhaseState) -> Result<f64> {
    check_q_regular(state.q)?;
    Ok(0.5 * state.yp * state.yp + landscape(state.q))
}

/// Reduced `G` plus `Σ_k (Q_k² − ln|Q_k|)` over the vacuum modes.
pub fn conserved_g_full(state: &PhaseState, modes: &ModeSpectrum) -> Result<f64> {
    modes.check(state)?;
    if let Some(k) = state
        .vacuum
        .iter()
        .position(|&v| v == 0.0 || !v.is_finite())
    {
        return Err(Error::Singular(format!(
            "vacuum amplitude Q_{k} = {} is singular for G",
            state.vacuum[k]
        )));
    }
    let base = conserved_g_reduced(state)?;
    Ok(base
        + state
            .vacuum
            .iter()
            .map(|&v| v * v - v.abs().ln())
            .sum::<f64>())
}

/// `G` on the flat layout. `NaN` when a vacuum amplitude is exactly zero: that
/// mode is a fixed point of the flow but its term in `G` is infinite.
#[cfg(test)]
pub(crate) fn monitor_g(y: &[f64]) -> f64 {
    let mut g = 0.5 * y[1] * y[1] + landscape(y[0]);
    for &v in &y[2..] {
        if v == 0.0 {
            return f64::NAN;
        }
        g += v * v - v.abs().ln();
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reduced_velocity_examples() {
        let (dq, dy) = velocity_reduced(&PhaseState::new(1.0, 0.7)).unwrap();
        assert_eq!(dq, 0.0);
        assert_relative_eq!(dy, -1.0 / 3.0, max_relative = 1e-15);

        let (dq, dy) = velocity_reduced(&PhaseState::new(2.0, 6.0)).unwrap();
        assert_relative_eq!(dq, -1.5, max_relative = 1e-15);
        assert_relative_eq!(dy, 13.0 / 24.0, max_relative = 1e-15);

        let qs = (5.0 + 17f64.sqrt()).sqrt() / 2.0;
        assert!((qs - 1.510223).abs() < 1e-6);
        let (dq, dy) = velocity_reduced(&PhaseState::new(qs, 0.0)).unwrap();
        assert_eq!(dq, 0.0);
        assert!(dy.abs() < 1e-15);
    }

    #[test]
    fn singular_q_rejected() {
        assert!(matches!(
            velocity_reduced(&PhaseState::new(0.0, 1.0)),
            Err(Error::Singular(_))
        ));
        assert!(velocity_full(&PhaseState::new(0.0, 1.0), &ModeSpectrum::empty()).is_err());
        for q in [-1.0, 0.0, 1.0] {
            assert!(conserved_g_reduced(&PhaseState::new(q, 0.2)).is_err());
        }
    }

    #[test]
    fn full_velocity_examples() {
        let s = PhaseState::with_vacuum(2.0, 0.0, vec![0.0]);
        let v = velocity_full(&s, &ModeSpectrum::uniform(1)).unwrap();
        assert_relative_eq!(v[1], 3.0 / 8.0, max_relative = 1e-15);
        assert_eq!(v[2], 0.0);

        let s = PhaseState::with_vacuum(0.8, 1.3, vec![std::f64::consts::FRAC_1_SQRT_2]);
        let v = velocity_full(&s, &ModeSpectrum::new(vec![1.7]).unwrap()).unwrap();
        let (_, dy) = velocity_reduced(&s).unwrap();
        assert!((v[1] - dy).abs() < 1e-15);
    }

    #[test]
    fn full_velocity_length_mismatch() {
        let s = PhaseState::with_vacuum(2.0, 0.0, vec![0.3, 0.2]);
        assert!(matches!(
            velocity_full(&s, &ModeSpectrum::uniform(1)),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(conserved_g_full(&s, &ModeSpectrum::uniform(3)).is_err());
    }

    #[test]
    fn conserved_g_examples() {
        let g = conserved_g_reduced(&PhaseState::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(g, 4.0 - 2f64.ln() - 3f64.ln(), max_relative = 1e-15);
        assert!((g - 2.208241).abs() < 5e-7);

        let outer = (5.0 + 17f64.sqrt()).sqrt() / 2.0;
        let inner = (5.0 - 17f64.sqrt()).sqrt() / 2.0;
        assert!((landscape(outer) - 1.62105).abs() < 5e-6);
        assert!((landscape(inner) - 1.22552).abs() < 5e-6);

        let one = conserved_g_full(
            &PhaseState::with_vacuum(2.0, 0.0, vec![1.0]),
            &ModeSpectrum::uniform(1),
        )
        .unwrap();
        assert_relative_eq!(one, g + 1.0, max_relative = 1e-15);
        let e = std::f64::consts::E;
        let half = conserved_g_full(
            &PhaseState::with_vacuum(2.0, 0.0, vec![e.sqrt()]),
            &ModeSpectrum::uniform(1),
        )
        .unwrap();
        assert_relative_eq!(half, g + e - 0.5, max_relative = 1e-14);

        assert!(conserved_g_full(
            &PhaseState::with_vacuum(2.0, 0.0, vec![0.0]),
            &ModeSpectrum::uniform(1)
        )
        .is_err());
    }

    #[test]
    fn g_is_annihilated_by_flow() {
        // v·∇G via centred differences
        let modes = ModeSpectrum::new(vec![0.6, 1.4]).unwrap();
        for &(q, yp, a, b) in &[
            (2.1, 0.4, 0.3, -1.2),
            (0.3, -1.1, 0.9, 0.05),
            (-1.7, 2.0, -0.4, 1.1),
        ] {
            let s = PhaseState::with_vacuum(q, yp, vec![a, b]);
            let v = velocity_full(&s, &modes).unwrap();
            let mut y = Vec::new();
            s.to_flat(&mut y);
            let h = 1e-6;
            let mut dot = 0.0;
            for i in 0..y.len() {
                let mut p = y.clone();
                let mut m = y.clone();
                p[i] += h;
                m[i] -= h;
                let grad = (monitor_g(&p) - monitor_g(&m)) / (2.0 * h);
                dot += grad * v[i];
            }
            assert!(dot.abs() < 1e-7, "v.grad G = {dot}");
        }
    }

    proptest::proptest! {
        #[test]
        fn empty_vacuum_reduction(q in -4.0f64..4.0, yp in -5.0f64..5.0) {
            proptest::prop_assume!(q.abs() > 1e-6 && (q.abs() - 1.0).abs() > 1e-6);
            let s = PhaseState::new(q, yp);
            let (dq, dy) = velocity_reduced(&s).unwrap();
            let v = velocity_full(&s, &ModeSpectrum::empty()).unwrap();
            proptest::prop_assert_eq!(v, vec![dq, dy]);
            proptest::prop_assert_eq!(
                conserved_g_full(&s, &ModeSpectrum::empty()).unwrap(),
                conserved_g_reduced(&s).unwrap()
            );
        }
    }
}
