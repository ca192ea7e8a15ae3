//! Gaussian blurring of an actual spectrum by the instrument response.
//!
//! The response has a fixed absolute width `ΔE = E_γ/T` taken from the
//! [`DispersionModel`], so blurring is a plain convolution (Weierstrass
//! transform) of the actual spectrum.

use serde::{Deserialize, Serialize};

use super::histogram::{SpectrumHistogram, Units};
use super::quadrature::adaptive_simpson;
use crate::quantum_state::{dispersion_kernel, normal_cdf, DispersionModel};
use crate::{Error, Result};

/// Spectral index of the default power-law background.
pub const DEFAULT_BACKGROUND_INDEX: f64 = 2.4;

const QUAD_TOL: f64 = 1e-8;
/// Kernel cut-off in units of `ΔE`.
const KERNEL_REACH: f64 = 12.0;
/// Required grid margin beyond the support, in units of `ΔE`.
const GRID_MARGIN: f64 = 6.0;

/// Continuum of the actual spectrum, normalized on its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackgroundModel {
    PowerLaw {
        index: f64,
        domain: (f64, f64),
        norm: f64,
    },
    /// Piecewise-linear table.
    Table {
        energies: Vec<f64>,
        values: Vec<f64>,
        norm: f64,
    },
}

impl BackgroundModel {
    /// `ρ(E) ∝ E^{−index}` on `domain`.
    pub fn power_law(index: f64, domain: (f64, f64)) -> Result<Self> {
        let (a, b) = domain;
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::invalid(
                "domain",
                format!("need 0 < a < b, got [{a}, {b}]"),
            ));
        }
        if !index.is_finite() {
            return Err(Error::invalid("index", "must be finite"));
        }
        let integral = if (index - 1.0).abs() < 1e-12 {
            (b / a).ln()
        } else {
            (b.powf(1.0 - index) - a.powf(1.0 - index)) / (1.0 - index)
        };
        Ok(Self::PowerLaw {
            index,
            domain,
            norm: 1.0 / integral,
        })
    }

    /// Power law with the default index over one decade centred (in log) on `e_line`.
    pub fn default_for_line(e_line: f64) -> Result<Self> {
        let s = 10f64.sqrt();
        Self::power_law(DEFAULT_BACKGROUND_INDEX, (e_line / s, e_line * s))
    }

    pub fn table(energies: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if energies.len() < 2 || energies.len() != values.len() {
            return Err(Error::invalid(
                "table",
                "need ≥ 2 (energy, value) pairs of equal length",
            ));
        }
        if energies.windows(2).any(|w| !(w[1] > w[0])) || !energies.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid(
                "table",
                "energies must be strictly increasing",
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("table", "values must be finite and ≥ 0"));
        }
        let integral: f64 = energies
            .windows(2)
            .zip(values.windows(2))
            .map(|(e, v)| 0.5 * (v[0] + v[1]) * (e[1] - e[0]))
            .sum();
        if !(integral > 0.0) {
            return Err(Error::invalid("table", "integral must be > 0"));
        }
        Ok(Self::Table {
            energies,
            values,
            norm: 1.0 / integral,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::PowerLaw { domain, .. } => *domain,
            Self::Table { energies, .. } => (energies[0], energies[energies.len() - 1]),
        }
    }

    pub fn density(&self, e: f64) -> f64 {
        let (a, b) = self.domain();
        if e < a || e > b {
            return 0.0;
        }
        match self {
            Self::PowerLaw { index, norm, .. } => norm * e.powf(-index),
            Self::Table {
                energies,
                values,
                norm,
            } => {
                let j = energies
                    .partition_point(|&x| x <= e)
                    .clamp(1, energies.len() - 1);
                let (e0, e1) = (energies[j - 1], energies[j]);
                let t = (e - e0) / (e1 - e0);
                norm * (values[j - 1] * (1.0 - t) + values[j] * t)
            }
        }
    }

    /// Points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::PowerLaw { domain, .. } => vec![domain.0, domain.1],
            Self::Table { energies, .. } => energies.clone(),
        }
    }
}

/// An actual (pre-measurement) spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActualSpectrum {
    /// Monochromatic line `δ(E − energy)`.
    Line {
        energy: f64,
    },
    GaussianLine {
        center: f64,
        sigma: f64,
    },
    Background(BackgroundModel),
    /// Weighted sum; weights are normalized to unit total.
    Mixture(Vec<(f64, ActualSpectrum)>),
}

impl ActualSpectrum {
    fn validate(&self) -> Result<()> {
        match self {
            Self::Line { energy } if !energy.is_finite() => {
                Err(Error::invalid("line", "energy must be finite"))
            }
            Self::GaussianLine { center, sigma }
                if !(center.is_finite() && *sigma > 0.0 && sigma.is_finite()) =>
            {
                Err(Error::invalid(
                    "gaussian line",
                    "need finite centre and sigma > 0",
                ))
            }
            Self::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::invalid("mixture", "must not be empty"));
                }
                if parts.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::invalid("mixture", "weights must be ≥ 0"));
                }
                if !(parts.iter().map(|(w, _)| w).sum::<f64>() > 0.0) {
                    return Err(Error::invalid("mixture", "weights must not all vanish"));
                }
                parts.iter().try_for_each(|(_, p)| p.validate())
            }
            _ => Ok(()),
        }
    }

    /// Interval holding the spectrum; Gaussian lines count ±6σ.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Line { energy } => (*energy, *energy),
            Self::GaussianLine { center, sigma } => (center - 6.0 * sigma, center + 6.0 * sigma),
            Self::Background(b) => b.domain(),
            Self::Mixture(parts) => parts
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .map(|(_, p)| p.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
                    (lo.min(a), hi.max(b))
                }),
        }
    }
}

fn gaussian_density(x: f64, center: f64, sigma: f64) -> f64 {
    dispersion_kernel(x, center, sigma)
}

/// `∫ ρ(E′) g(E′) dE′` over `[lo, hi]`, split at `breaks`.
fn integrate_pieces(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|b| *b > lo && *b < hi))
        .chain(std::iter::once(hi))
        .collect();
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_simpson(&f, w[0], w[1], QUAD_TOL / (cuts.len() - 1) as f64, 16)?;
    }
    Ok(total)
}

/// Observed density `ρ_obs(E) = ∫ ρ_act(E′) D(E | E′) dE′` at one energy.
pub fn convolve_density_at(
    actual: &ActualSpectrum,
    model: &DispersionModel,
    energy: f64,
) -> Result<f64> {
    actual.validate()?;
    density_at(actual, model.delta_e(), energy)
}

fn density_at(actual: &ActualSpectrum, de: f64, e: f64) -> Result<f64> {
    let reach = KERNEL_REACH * de;
    match actual {
        ActualSpectrum::Line { energy } => Ok(dispersion_kernel(e, *energy, de)),
        ActualSpectrum::GaussianLine { center, sigma } => {
            let lo = (center - 12.0 * sigma).max(e - reach);
            let hi = (center + 12.0 * sigma).min(e + reach);
            integrate_pieces(
                |x| gaussian_density(x, *center, *sigma) * dispersion_kernel(e, x, de),
                lo,
                hi,
                &[*center],
            )
        }
        ActualSpectrum::Background(b) => {
            let (a, bb) = b.domain();
            integrate_pieces(
                |x| b.density(x) * dispersion_kernel(e, x, de),
                a.max(e - reach),
                bb.min(e + reach),
                &b.breakpoints(),
            )
        }
        ActualSpectrum::Mixture(parts) => {
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            let mut acc = 0.0;
            for (w, p) in parts {
                if *w > 0.0 {
                    acc += w / total * density_at(p, de, e)?;
                }
            }
            Ok(acc)
        }
    }
}

/// Probability that a photon of energy `true_e` is recorded in `[a, b]`.
fn response_mass(a: f64, b: f64, true_e: f64, de: f64) -> f64 {
    let (za, zb) = ((a - true_e) / de, (b - true_e) / de);
    if za > 0.0 {
        // upper tail: difference of small complements
        normal_cdf(-za) - normal_cdf(-zb)
    } else {
        normal_cdf(zb) - normal_cdf(za)
    }
}

fn bin_mass(actual: &ActualSpectrum, de: f64, a: f64, b: f64) -> Result<f64> {
    let reach = KERNEL_REACH * de;
    match actual {
        ActualSpectrum::Line { energy } => Ok(response_mass(a, b, *energy, de)),
        ActualSpectrum::GaussianLine { center, sigma } => integrate_pieces(
            |x| gaussian_density(x, *center, *sigma) * response_mass(a, b, x, de),
            (center - 12.0 * sigma).max(a - reach),
            (center + 12.0 * sigma).min(b + reach),
            &[*center, a, b],
        ),
        ActualSpectrum::Background(bg) => {
            let (lo, hi) = bg.domain();
            let mut breaks = bg.breakpoints();
            breaks.extend([a, b]);
            integrate_pieces(
                |x| bg.density(x) * response_mass(a, b, x, de),
                lo.max(a - reach),
                hi.min(b + reach),
                &breaks,
            )
        }
        ActualSpectrum::Mixture(parts) => {
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            let mut acc = 0.0;
            for (w, p) in parts {
                if *w > 0.0 {
                    acc += w / total * bin_mass(p, de, a, b)?;
                }
            }
            Ok(acc)
        }
    }
}

/// Blurs `actual` with the instrument response and bins the result on
/// `energy_grid` (bin edges). Each bin holds the exact probability of a
/// recorded energy falling in it, up to quadrature error.
pub fn convolve_spectrum(
    actual: &ActualSpectrum,
    model: &DispersionModel,
    energy_grid: &[f64],
) -> Result<SpectrumHistogram> {
    actual.validate()?;
    if energy_grid.len() < 2 {
        return Err(Error::invalid("energy_grid", "need at least two edges"));
    }
    let de = model.delta_e();
    let (lo, hi) = actual.support();
    let (g0, g1) = (energy_grid[0], energy_grid[energy_grid.len() - 1]);
    if g0 > lo - GRID_MARGIN * de || g1 < hi + GRID_MARGIN * de {
        return Err(Error::invalid(
            "energy_grid",
            format!(
                "grid [{g0}, {g1}] does not cover the support [{lo}, {hi}] plus {GRID_MARGIN} ΔE"
            ),
        ));
    }
    let masses = energy_grid
        .windows(2)
        .map(|w| bin_mass(actual, de, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    SpectrumHistogram::from_masses(
        energy_grid.to_vec(),
        &masses,
        Units::Energy {
            e_gamma: model.e_gamma(),
            resolution: model.resolution(),
        },
    )
}
