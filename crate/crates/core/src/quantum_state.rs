//! Analytic densities of the one-photon product state and the energy-dispersion
//! bookkeeping.
//!
//! The wavefunction is the product of a Gaussian pointer packet and the first
//! excited harmonic-oscillator state of the photon mode. In the frozen frame
//! `(Q, Y′)` its modulus squared is time independent.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `(2/√π) Q² e^{−Q²}`, the first-excited-state density of the photon mode.
#[inline]
pub fn excited_mode_density(q: f64) -> f64 {
    2.0 / PI.sqrt() * q * q * (-q * q).exp()
}

/// Standard normal density of the shifted pointer coordinate.
#[inline]
pub fn pointer_density(yp: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * yp * yp).exp()
}

/// Born density `|ψ|²` in the frozen frame.
#[inline]
pub fn equilibrium_density(q: f64, yp: f64) -> f64 {
    pointer_density(yp) * excited_mode_density(q)
}

/// Width parameter of the widened (or narrowed) nonequilibrium family.
///
/// `w = 1` is equilibrium, `w > 1` spreads the field amplitude, `w < 1`
/// squeezes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityParams {
    w: f64,
}

impl ReducedDensityParams {
    pub fn new(w: f64) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid(
                "w",
                format!("must be finite and > 0, got {w}"),
            ));
        }
        Ok(Self { w })
    }

    pub fn equilibrium() -> Self {
        Self { w: 1.0 }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn density(&self, q: f64, yp: f64) -> f64 {
        equilibrium_density(q / self.w, yp) / self.w
    }

    /// Analytic `⟨Q²⟩ = 3w²/2`.
    pub fn mean_q_squared(&self) -> f64 {
        1.5 * self.w * self.w
    }
}

/// `ρ₀(Q, Y′) = |ψ(Q/w, Y′)|² / w`.
pub fn widened_density(q: f64, yp: f64, w: f64) -> Result<f64> {
    Ok(ReducedDensityParams::new(w)?.density(q, yp))
}

/// Idealized Gaussian energy response of a telescope.
///
/// Only the line energy and the rescaled time `T` are stored; the fractional
/// dispersion is always derived as `1/T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    e_gamma: f64,
    resolution: f64,
}

impl DispersionModel {
    pub fn new(e_gamma: f64, resolution: f64) -> Result<Self> {
        if !(e_gamma.is_finite() && e_gamma > 0.0) {
            return Err(Error::invalid(
                "E_gamma",
                format!("must be > 0, got {e_gamma}"),
            ));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::invalid(
                "T",
                format!("must be > 0, got {resolution}"),
            ));
        }
        Ok(Self {
            e_gamma,
            resolution,
        })
    }

    /// Builds the model from a fractional dispersion `ΔE/E_γ`, e.g. `0.1` for 10 %.
    pub fn from_fractional_dispersion(e_gamma: f64, fractional: f64) -> Result<Self> {
        if !(fractional.is_finite() && fractional > 0.0) {
            return Err(Error::invalid(
                "fractional_dispersion",
                format!("must be > 0, got {fractional}"),
            ));
        }
        Self::new(e_gamma, 1.0 / fractional)
    }

    pub fn e_gamma(&self) -> f64 {
        self.e_gamma
    }

    /// Rescaled time `T`.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn fractional_dispersion(&self) -> f64 {
        1.0 / self.resolution
    }

    /// Absolute dispersion `ΔE = E_γ / T`.
    pub fn delta_e(&self) -> f64 {
        self.e_gamma / self.resolution
    }

    pub fn with_resolution(&self, resolution: f64) -> Result<Self> {
        Self::new(self.e_gamma, resolution)
    }

    pub fn pointer_to_energy(&self, yp: f64) -> f64 {
        self.e_gamma * (1.0 + yp / self.resolution)
    }

    pub fn energy_to_pointer(&self, energy: f64) -> f64 {
        (energy / self.e_gamma - 1.0) * self.resolution
    }

    /// `D(E | E_γ)`: Gaussian in `E` centred on `E_γ` with width `ΔE`.
    pub fn dispersion_pdf(&self, energy: f64) -> f64 {
        dispersion_kernel(energy, self.e_gamma, self.delta_e())
    }
}

/// Gaussian response to a photon of energy `true_energy` for an instrument
/// with absolute dispersion `delta_e`.
#[inline]
pub fn dispersion_kernel(energy: f64, true_energy: f64, delta_e: f64) -> f64 {
    let z = (energy - true_energy) / delta_e;
    INV_SQRT_2PI / delta_e * (-0.5 * z * z).exp()
}

pub fn dispersion_pdf(energy: f64, model: &DispersionModel) -> f64 {
    model.dispersion_pdf(energy)
}

pub fn pointer_to_energy(yp: f64, model: &DispersionModel) -> f64 {
    model.pointer_to_energy(yp)
}

pub fn energy_to_pointer(energy: f64, model: &DispersionModel) -> f64 {
    model.energy_to_pointer(energy)
}

/// Standard normal CDF `Φ(z)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / SQRT_2)
}
