use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{Binning, ContourConfig, Scenario, ScenarioConfig};
use super::contours::{density_field, trace_orbit};
use super::table::{Cell, OutputFormat, Table};
use crate::dynamics::{conserved_g_full, IntegratorSettings, ModeSpectrum, Region};
use crate::ensemble::{evolve_to_snapshots, marginal_histogram, sample, Axis, Ensemble};
use crate::quantum_state::DispersionModel;
use crate::spectra::{
    estimate_dispersion_noneq_pointer_range, mode_count, ModeCountOptions, SpectrumHistogram,
};
use crate::{Error, Result};

/// Version of the emitted file layout; bumped whenever columns or manifest
/// keys change meaning.
pub const ARTIFACT_VERSION: u32 = 1;

/// Marker file present while a run is in progress or after it failed.
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

pub const MANIFEST_FILE: &str = "manifest.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter { .. }
        | Error::LengthMismatch { .. }
        | Error::UnitMismatch(_) => EXIT_CONFIG,
        Error::Integration { .. }
        | Error::PointFailed { .. }
        | Error::Singular(_)
        | Error::NoPeriod(_)
        | Error::Quadrature(_) => EXIT_INTEGRATION,
        Error::Io { .. } => EXIT_IO,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotRecord {
    pub index: usize,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_file: Option<String>,
    pub yp_histogram_file: String,
    pub yp_out_of_range_mass: f64,
    pub yp_mode_count: usize,
    /// Absent at `T = 0`, where the energy assignment `E_γ(1 + Y′/T)` is
    /// undefined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_histogram_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_out_of_range_mass: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub region: &'static str,
    pub sign: f64,
    pub level: f64,
    pub period: f64,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub preset: String,
    pub kind: &'static str,
    pub seed: Option<u64>,
    pub n_points: Option<usize>,
    pub w: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub integrator: IntegratorSettings,
    pub binning: Option<Binning>,
    pub artifact_version: u32,
    pub software: String,
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub vacuum_mode_ratios: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<SnapshotRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orbits: Vec<OrbitRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    pub wall_time_seconds: f64,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
}

/// Runs `scenario` and writes its files into the scenario's output directory.
///
/// A marker file `INCOMPLETE` exists in the directory for the duration of the
/// run and is left behind (holding the error message) if the run fails; the
/// manifest is written last.
pub fn run_scenario(scenario: &Scenario, format: OutputFormat) -> Result<RunReport> {
    scenario.validate()?;
    let dir = scenario.output_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let marker = dir.join(INCOMPLETE_MARKER);
    fs::write(&marker, "run in progress\n").map_err(|e| Error::io(&marker, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    }

    let started = Instant::now();
    let outcome = match scenario {
        Scenario::Ensemble(c) => run_ensemble(c, &dir, format),
        Scenario::Contours(c) => run_contours(c, &dir, format),
    };
    let mut manifest = match outcome {
        Ok(m) => m,
        Err(e) => {
            // best effort: the original error matters more than the marker
            let _ = fs::write(&marker, format!("run failed: {e}\n"));
            return Err(e);
        }
    };
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();

    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    Ok(RunReport {
        output_dir: dir,
        manifest,
    })
}

fn software() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

fn histogram_table(h: &SpectrumHistogram) -> Table {
    let mut t = Table::new(vec![
        "bin_left".into(),
        "bin_right".into(),
        "density".into(),
    ]);
    for (i, &d) in h.densities().iter().enumerate() {
        t.push(vec![
            Cell::Num(h.edges()[i]),
            Cell::Num(h.edges()[i + 1]),
            Cell::Num(d),
        ]);
    }
    t
}

fn points_table(e: &Ensemble, modes: &ModeSpectrum) -> Table {
    let mut columns: Vec<String> = ["index", "Q", "Y_prime", "Y_moving", "G"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend((0..e.vacuum_len()).map(|k| format!("Qk_{k}")));
    let mut t = Table::new(columns);
    for (i, p) in e.points().iter().enumerate() {
        let g = conserved_g_full(p, modes).unwrap_or(f64::NAN);
        let mut row = vec![
            Cell::Int(i as u64),
            Cell::Num(p.q),
            Cell::Num(p.yp),
            Cell::Num(p.yp + e.t_now()),
            Cell::Num(g),
        ];
        row.extend(p.vacuum.iter().map(|&v| Cell::Num(v)));
        t.push(row);
    }
    t
}

fn run_ensemble(c: &ScenarioConfig, dir: &Path, format: OutputFormat) -> Result<Manifest> {
    let modes = ModeSpectrum::new(c.vacuum_mode_ratios.clone())?;
    let w = c.sampler.w();
    let initial = sample(c.n_points, w, modes.len(), c.seed)?;
    let snaps = evolve_to_snapshots(&initial, &c.snapshot_times, &c.integrator, &modes)?;
    let ext = format.extension();
    let mode_opts = ModeCountOptions::default();

    let mut records = Vec::with_capacity(snaps.times.len());
    for (k, (&t, e)) in snaps.times.iter().zip(&snaps.ensembles).enumerate() {
        let points_file = if c.marginal_only {
            None
        } else {
            let name = format!("snapshot_{k:02}_points.{ext}");
            points_table(e, &modes).write(&dir.join(&name), format)?;
            Some(name)
        };

        let yp = marginal_histogram(e, Axis::Yp, c.binning.bins, c.binning.range())?;
        let yp_name = format!("snapshot_{k:02}_yp_hist.{ext}");
        histogram_table(&yp).write(&dir.join(&yp_name), format)?;

        let (energy_name, energy_oor) = if t > 0.0 {
            let model = DispersionModel::new(c.e_gamma, t)?;
            let h = estimate_dispersion_noneq_pointer_range(
                e,
                &model,
                c.binning.bins,
                c.binning.range(),
            )?;
            let name = format!("snapshot_{k:02}_energy_hist.{ext}");
            histogram_table(&h).write(&dir.join(&name), format)?;
            (Some(name), Some(h.out_of_range_mass()))
        } else {
            (None, None)
        };

        records.push(SnapshotRecord {
            index: k,
            t,
            points_file,
            yp_histogram_file: yp_name,
            yp_out_of_range_mass: yp.out_of_range_mass(),
            yp_mode_count: mode_count(&yp, &mode_opts),
            energy_histogram_file: energy_name,
            energy_out_of_range_mass: energy_oor,
        });
    }

    Ok(Manifest {
        preset: c.name.clone(),
        kind: "ensemble",
        seed: Some(c.seed),
        n_points: Some(c.n_points),
        w: Some(w),
        snapshot_times: c.snapshot_times.clone(),
        integrator: c.integrator,
        binning: Some(c.binning),
        artifact_version: ARTIFACT_VERSION,
        software: software(),
        format,
        e_gamma: Some(c.e_gamma),
        vacuum_mode_ratios: c.vacuum_mode_ratios.clone(),
        snapshots: records,
        orbits: Vec::new(),
        files: Vec::new(),
        wall_time_seconds: 0.0,
    })
}

fn run_contours(c: &ContourConfig, dir: &Path, format: OutputFormat) -> Result<Manifest> {
    let ext = format.extension();
    let mut table = Table::new(
        ["region", "sign", "level", "vertex", "Q", "Y_prime"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let mut orbits = Vec::new();
    let sides = [
        (Region::Outer, -1.0, &c.outer_levels),
        (Region::Inner, -1.0, &c.inner_levels),
        (Region::Inner, 1.0, &c.inner_levels),
        (Region::Outer, 1.0, &c.outer_levels),
    ];
    for (region, sign, levels) in sides {
        for &level in levels {
            let orbit = trace_orbit(level, region, sign, c.vertices, &c.integrator)?;
            for (j, v) in orbit.vertices.iter().enumerate() {
                table.push(vec![
                    Cell::Text(region.as_str().into()),
                    Cell::Num(sign),
                    Cell::Num(level),
                    Cell::Int(j as u64),
                    Cell::Num(v.q),
                    Cell::Num(v.yp),
                ]);
            }
            orbits.push(OrbitRecord {
                region: region.as_str(),
                sign,
                level,
                period: orbit.period,
            });
        }
    }
    let contour_name = format!("contours.{ext}");
    table.write(&dir.join(&contour_name), format)?;

    let mut grid = Table::new(vec!["Q".into(), "Y_prime".into(), "density".into()]);
    for (q, yp, d) in density_field(&c.density_grid) {
        grid.push(vec![Cell::Num(q), Cell::Num(yp), Cell::Num(d)]);
    }
    let grid_name = format!("density_grid.{ext}");
    grid.write(&dir.join(&grid_name), format)?;

    Ok(Manifest {
        preset: c.name.clone(),
        kind: "contours",
        seed: None,
        n_points: None,
        w: None,
        snapshot_times: Vec::new(),
        integrator: c.integrator,
        binning: None,
        artifact_version: ARTIFACT_VERSION,
        software: software(),
        format,
        e_gamma: None,
        vacuum_mode_ratios: Vec::new(),
        snapshots: Vec::new(),
        orbits,
        files: vec![contour_name, grid_name],
        wall_time_seconds: 0.0,
    })
}
