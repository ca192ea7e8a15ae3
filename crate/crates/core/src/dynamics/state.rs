use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A configuration-space point: photon-mode amplitude `Q`, shifted pointer
/// `Y′`, and optional vacuum-mode amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: f64,
    pub yp: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vacuum: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: f64, yp: f64) -> Self {
        Self {
            q,
            yp,
            vacuum: Vec::new(),
        }
    }

    pub fn with_vacuum(q: f64, yp: f64, vacuum: Vec<f64>) -> Self {
        Self { q, yp, vacuum }
    }

    pub fn dim(&self) -> usize {
        2 + self.vacuum.len()
    }

    pub fn region(&self) -> Option<Region> {
        Region::of(self.q)
    }

    pub(crate) fn to_flat(&self, out: &mut Vec<f64>) {
        out.clear();
        out.push(self.q);
        out.push(self.yp);
        out.extend_from_slice(&self.vacuum);
    }

    /// Distance of `Q` to the nearest singular manifold `{−1, 0, 1}`.
    pub fn barrier_distance(&self) -> f64 {
        barrier_distance(self.q)
    }

    /// `(sign Q, sign(|Q| − 1))`, constant along any exact trajectory.
    pub fn barrier_signature(&self) -> (i8, i8) {
        barrier_signature(self.q)
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.yp.is_finite() && self.vacuum.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn barrier_distance(q: f64) -> f64 {
    q.abs().min((q.abs() - 1.0).abs())
}

pub(crate) fn barrier_signature(q: f64) -> (i8, i8) {
    fn sgn(x: f64) -> i8 {
        if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        }
    }
    (sgn(q), sgn(q.abs() - 1.0))
}

/// The two families of orbits: inside the strip `|Q| < 1` or outside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Inner,
    Outer,
}

impl Region {
    pub fn of(q: f64) -> Option<Self> {
        let a = q.abs();
        if a == 0.0 || a == 1.0 || !a.is_finite() {
            None
        } else if a < 1.0 {
            Some(Region::Inner)
        } else {
            Some(Region::Outer)
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Inner => "inner",
            Region::Outer => "outer",
        }
    }
}

/// Energy ratios `E_k / E_γ` of the vacuum modes, one per vacuum coordinate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    ratios: Vec<f64>,
}

impl ModeSpectrum {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::invalid(
                "mode ratio",
                format!("must be > 0, got {r}"),
            ));
        }
        Ok(Self { ratios })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `n` modes, each with `E_k = E_γ`.
    pub fn uniform(n: usize) -> Self {
        Self {
            ratios: vec![1.0; n],
        }
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub(crate) fn check(&self, state: &PhaseState) -> Result<()> {
        if state.vacuum.len() != self.ratios.len() {
            return Err(Error::LengthMismatch {
                what: "state.vacuum",
                got: state.vacuum.len(),
                expected: self.ratios.len(),
            });
        }
        Ok(())
    }
}
