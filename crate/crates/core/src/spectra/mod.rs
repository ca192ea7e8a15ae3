//! Line profiles downstream of the dynamics.

mod compose;
mod convolution;
mod histogram;
mod modes;
mod quadrature;

pub use compose::{compose_observed, LineScenario};
pub use convolution::{
    convolve_density_at, convolve_spectrum, ActualSpectrum, BackgroundModel,
    DEFAULT_BACKGROUND_INDEX,
};
pub use histogram::{uniform_edges, SpectrumHistogram, Units};
pub use modes::{mode_count, ModeCountOptions};

use crate::ensemble::Ensemble;
use crate::quantum_state::DispersionModel;
use crate::{Error, Result};

/// Default binning of every figure comparison, in `Y′` units.
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_RANGE: (f64, f64) = (-5.0, 5.0);

/// Histogram of recorded energies `E = E_γ(1 + Y′/T)` for a snapshot taken at
/// `T = model.resolution()`. `range` is in energy units.
pub fn estimate_dispersion_noneq(
    snapshot: &Ensemble,
    model: &DispersionModel,
    bins: usize,
    range: (f64, f64),
) -> Result<SpectrumHistogram> {
    let t = model.resolution();
    if (snapshot.t_now() - t).abs() > 1e-12 * t {
        return Err(Error::invalid(
            "model",
            format!(
                "snapshot time {} does not match the model resolution T = {t}",
                snapshot.t_now()
            ),
        ));
    }
    let energies: Vec<f64> = snapshot
        .points()
        .iter()
        .map(|p| model.pointer_to_energy(p.yp))
        .collect();
    SpectrumHistogram::from_samples(
        &energies,
        bins,
        range,
        Units::Energy {
            e_gamma: model.e_gamma(),
            resolution: t,
        },
    )
}

/// [`estimate_dispersion_noneq`] with the energy range given in `Y′` units.
pub fn estimate_dispersion_noneq_pointer_range(
    snapshot: &Ensemble,
    model: &DispersionModel,
    bins: usize,
    pointer_range: (f64, f64),
) -> Result<SpectrumHistogram> {
    let range = (
        model.pointer_to_energy(pointer_range.0),
        model.pointer_to_energy(pointer_range.1),
    );
    estimate_dispersion_noneq(snapshot, model, bins, range)
}
