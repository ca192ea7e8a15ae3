//! Guidance flows in the frozen frame and the machinery to integrate them.
//!
//! The reduced system lives in `(Q, Y′)`; the multi-mode system appends one
//! amplitude per vacuum mode. Both admit a conserved function `G` whose
//! logarithmic singularities at `Q ∈ {−1, 0, 1}` act as impassable barriers.

mod field;
mod integrator;
mod orbits;
mod state;

pub use field::{
    conserved_g_full, conserved_g_reduced, landscape, velocity_full, velocity_reduced,
};
pub(crate) use integrator::validate_times;
pub use integrator::{integrate, integrate_to_times, IntegratorSettings, Trajectory};
pub use orbits::{
    detect_period, half_width_bound, half_width_bound_derived, orbit_turning_points,
    region_minimum, stationary_points, PeriodOptions, PRINTED_INNER_CONSTANT,
    PRINTED_OUTER_CONSTANT,
};
pub use state::{ModeSpectrum, PhaseState, Region};
