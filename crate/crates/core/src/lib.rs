//! Pilot-wave (de Broglie–Bohm) model of an idealized photon energy measurement.
//!
//! A single excited field mode `Q` is coupled to a measurement pointer `Y`.
//! In the frozen frame `(Q, Y′)` with `Y′ = Y − T` the Born distribution is
//! stationary and the pointer reading maps to a recorded energy through the
//! rescaled time `T`, which doubles as the telescope resolution
//! `T = (ΔE/E_γ)⁻¹`.
//!
//! Modules, bottom-up:
//!
//! * [`quantum_state`] – analytic densities and the energy-dispersion model.
//! * [`dynamics`] – guidance velocity fields, the conserved function `G`,
//!   the adaptive integrator, stationary points and orbit periods.
//! * [`ensemble`] – seeded sampling and deterministic parallel evolution.
//! * [`spectra`] – histograms, dispersion estimates, blurring and composition.
//! * [`io`] – scenario configuration, presets and the file outputs of the CLI.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
mod error;
pub mod io;
pub mod quantum_state;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};

pub use dynamics::{IntegratorSettings, ModeSpectrum, PhaseState, Region, Trajectory};

pub use quantum_state::{DispersionModel, ReducedDensityParams};

pub use ensemble::{Ensemble, SnapshotSet};

pub use spectra::{SpectrumHistogram, Units};
