//! Scenario configuration, presets and the files written by the CLI.
//!
//! An ensemble run writes, per snapshot `k`:
//!
//! * `snapshot_kk_points.csv` – `index,Q,Y_prime,Y_moving,G[,Qk_0..]`, where
//!   `Y_moving = Y′ + T` (omitted for marginal-only scenarios);
//! * `snapshot_kk_yp_hist.csv` – `bin_left,bin_right,density` of `Y′`;
//! * `snapshot_kk_energy_hist.csv` – the same for the recorded energy
//!   `E_γ(1 + Y′/T)` (omitted at `T = 0`);
//!
//! plus `manifest.json`, which maps snapshot indices to times and records
//! each histogram's out-of-range mass. Numbers are written with 17
//! significant digits, so identical configurations give identical bytes.

mod config;
mod contours;
mod presets;
mod run;
mod table;

pub use config::{
    Binning, ContourConfig, DensityGrid, Sampler, Scenario, ScenarioConfig, DEFAULT_SEED,
};
pub use contours::{density_field, trace_orbit, Orbit};
pub use presets::{list_presets, preset};
pub use run::{
    exit_code, run_scenario, Manifest, OrbitRecord, RunReport, SnapshotRecord, ARTIFACT_VERSION,
    EXIT_CONFIG, EXIT_INTEGRATION, EXIT_IO, EXIT_OK, INCOMPLETE_MARKER, MANIFEST_FILE,
};
pub use table::{format_number, Cell, OutputFormat, Table};

/// Resolves a preset name, or failing that, loads a TOML scenario file.
pub fn resolve_scenario(name_or_path: &str) -> crate::Result<Scenario> {
    if let Some(s) = preset(name_or_path) {
        return Ok(s);
    }
    let path = std::path::Path::new(name_or_path);
    if path.is_file() {
        return Scenario::from_toml_file(path);
    }
    Err(crate::Error::Config(format!(
        "`{name_or_path}` is neither a preset ({}) nor a readable config file",
        list_presets()
            .iter()
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "tiny"
n_points = 8
snapshot_times = [0.0, 1.0]
[sampler]
kind = "widened"
w = 2.0
"#;

    #[test]
    fn toml_round_trip_and_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        let Scenario::Ensemble(c) = s else {
            panic!("expected an ensemble scenario")
        };
        assert_eq!(c.sampler, Sampler::Widened { w: 2.0 });
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.binning, Binning::default());
        assert_eq!(c.output_dir(), std::path::Path::new("out/tiny"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for extra in ["bogus = 1\n", "[integrator]\nrel_tol = 1e-8\nfoo = 2\n"] {
            let text = format!("{MINIMAL}{extra}");
            let err = Scenario::from_toml_str(&text).unwrap_err();
            assert!(matches!(err, crate::Error::Config(_)), "{err}");
        }
        let nested = MINIMAL.replace("w = 2.0", "w = 2.0\nshape = 1");
        assert!(Scenario::from_toml_str(&nested).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (from, to) in [
            ("n_points = 8", "n_points = 0"),
            ("w = 2.0", "w = -1.0"),
            ("[0.0, 1.0]", "[1.0, 0.5]"),
        ] {
            let err = Scenario::from_toml_str(&MINIMAL.replace(from, to)).unwrap_err();
            assert_eq!(exit_code(&err), EXIT_CONFIG, "{err}");
        }
        let err = Scenario::from_toml_str(&format!("kind = \"other\"\n{MINIMAL}")).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }

    #[test]
    fn presets_and_paths_resolve() {
        assert_eq!(resolve_scenario("fig4").unwrap().name(), "fig4");
        let err = resolve_scenario("no-such-preset").unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
    }
}
