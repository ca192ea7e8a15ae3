use super::config::{
    Binning, ContourConfig, DensityGrid, Sampler, Scenario, ScenarioConfig, DEFAULT_SEED,
};
use crate::dynamics::IntegratorSettings;
use crate::ensemble::DEFAULT_POINTS;

const PRESETS: [(&str, &str); 6] = [
    (
        "fig1",
        "closed orbits on G level sets in all four regions, plus the Born density on a grid",
    ),
    (
        "fig2",
        "w = 2 ensemble at T = 0, 5, 10, 50, 100, 1000 (points, Y′ and energy histograms)",
    ),
    (
        "fig3",
        "w = 4 ensemble at the fig2 times, marginal histograms only",
    ),
    (
        "fig4",
        "w = 1/4 ensemble at T = 0, 5, 10, 15, 20, 100 (points, Y′ and energy histograms)",
    ),
    ("fig5", "the fig4 ensemble, marginal histograms only"),
    (
        "equivariance",
        "Born-distributed ensemble at T = 0, 5, 10, 50, 100 (stationarity check data)",
    ),
];

/// Preset names with one-line descriptions.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    PRESETS.to_vec()
}

fn ensemble(name: &str, sampler: Sampler, times: &[f64], marginal_only: bool) -> Scenario {
    Scenario::Ensemble(ScenarioConfig {
        name: name.to_string(),
        sampler,
        n_points: DEFAULT_POINTS,
        snapshot_times: times.to_vec(),
        vacuum_mode_ratios: Vec::new(),
        integrator: IntegratorSettings::default(),
        binning: Binning::default(),
        output_dir: None,
        seed: DEFAULT_SEED,
        e_gamma: 1.0,
        marginal_only,
    })
}

const WIDE_TIMES: [f64; 6] = [0.0, 5.0, 10.0, 50.0, 100.0, 1000.0];
const NARROW_TIMES: [f64; 6] = [0.0, 5.0, 10.0, 15.0, 20.0, 100.0];

/// The scenario behind a preset name.
pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        "fig1" => Scenario::Contours(ContourConfig {
            name: "fig1".into(),
            outer_levels: vec![1.7, 2.0, 2.5, 3.0, 4.0],
            inner_levels: vec![1.3, 1.6, 2.0, 2.5, 3.0],
            vertices: 400,
            integrator: IntegratorSettings::default(),
            density_grid: DensityGrid {
                q_min: -3.0,
                q_max: 3.0,
                q_nodes: 121,
                yp_min: -4.0,
                yp_max: 4.0,
                yp_nodes: 161,
            },
            output_dir: None,
        }),
        "fig2" => ensemble("fig2", Sampler::Widened { w: 2.0 }, &WIDE_TIMES, false),
        "fig3" => ensemble("fig3", Sampler::Widened { w: 4.0 }, &WIDE_TIMES, true),
        "fig4" => ensemble("fig4", Sampler::Widened { w: 0.25 }, &NARROW_TIMES, false),
        "fig5" => ensemble("fig5", Sampler::Widened { w: 0.25 }, &NARROW_TIMES, true),
        "equivariance" => ensemble(
            "equivariance",
            Sampler::Equilibrium,
            &[0.0, 5.0, 10.0, 50.0, 100.0],
            false,
        ),
        _ => return None,
    };
    Some(s)
}
