use serde::{Deserialize, Serialize};

use super::convolution::{convolve_spectrum, ActualSpectrum, BackgroundModel};
use super::histogram::{SpectrumHistogram, Units};
use crate::quantum_state::DispersionModel;
use crate::{Error, Result};

/// Signal/background counts for a line at `e_line` seen at resolution `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineScenario {
    e_line: f64,
    n_sig: f64,
    n_bkg: f64,
    model: DispersionModel,
}

impl LineScenario {
    pub fn new(e_line: f64, n_sig: f64, n_bkg: f64, resolution: f64) -> Result<Self> {
        if !(n_sig >= 0.0 && n_bkg >= 0.0 && n_sig.is_finite() && n_bkg.is_finite()) {
            return Err(Error::invalid(
                "counts",
                "n_sig and n_bkg must be finite and ≥ 0",
            ));
        }
        if !(n_sig + n_bkg > 0.0) {
            return Err(Error::invalid("counts", "n_sig + n_bkg must be > 0"));
        }
        Ok(Self {
            e_line,
            n_sig,
            n_bkg,
            model: DispersionModel::new(e_line, resolution)?,
        })
    }

    pub fn e_line(&self) -> f64 {
        self.e_line
    }

    pub fn n_sig(&self) -> f64 {
        self.n_sig
    }

    pub fn n_bkg(&self) -> f64 {
        self.n_bkg
    }

    pub fn n_tot(&self) -> f64 {
        self.n_sig + self.n_bkg
    }

    pub fn model(&self) -> &DispersionModel {
        &self.model
    }
}

/// Equilibrium-blurred background plus a (possibly nonequilibrium) signal
/// profile, mixed in proportion to the counts and binned on `energy_grid`.
pub fn compose_observed(
    scenario: &LineScenario,
    background: &BackgroundModel,
    d_noneq: &SpectrumHistogram,
    energy_grid: &[f64],
) -> Result<SpectrumHistogram> {
    let model = scenario.model();
    match d_noneq.units() {
        Units::Energy {
            e_gamma,
            resolution,
        } if e_gamma == model.e_gamma() && resolution == model.resolution() => {}
        other => {
            return Err(Error::UnitMismatch(format!(
                "signal profile has units {other:?}, expected energy units at E_γ = {}, T = {}",
                model.e_gamma(),
                model.resolution()
            )))
        }
    }
    let f_bkg = scenario.n_bkg() / scenario.n_tot();
    let f_sig = scenario.n_sig() / scenario.n_tot();

    let bkg_masses = if f_bkg > 0.0 {
        convolve_spectrum(
            &ActualSpectrum::Background(background.clone()),
            model,
            energy_grid,
        )?
        .masses()
    } else {
        vec![0.0; energy_grid.len().saturating_sub(1)]
    };
    let sig_masses = d_noneq.rebin(energy_grid.to_vec())?.masses();
    let masses: Vec<f64> = bkg_masses
        .iter()
        .zip(&sig_masses)
        .map(|(b, s)| f_bkg * b + f_sig * s)
        .collect();
    SpectrumHistogram::from_masses(energy_grid.to_vec(), &masses, d_noneq.units())
}
