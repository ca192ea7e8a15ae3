use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorSettings;
use crate::spectra::{DEFAULT_BINS, DEFAULT_RANGE};
use crate::{Error, Result};

/// Seed used by every preset unless overridden on the command line.
pub const DEFAULT_SEED: u64 = 2718;

/// Initial distribution of an ensemble run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Sampler {
    /// Born distribution `|ψ|²`.
    Equilibrium,
    /// `|ψ(Q/w, Y′)|²/w`.
    Widened { w: f64 },
}

impl Sampler {
    pub fn w(&self) -> f64 {
        match *self {
            Sampler::Equilibrium => 1.0,
            Sampler::Widened { w } => w,
        }
    }
}

/// Histogram binning in `Y′` units; energy histograms use the image of this
/// range under `E = E_γ(1 + Y′/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Binning {
    pub bins: usize,
    pub min: f64,
    pub max: f64,
}

impl Default for Binning {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            min: DEFAULT_RANGE.0,
            max: DEFAULT_RANGE.1,
        }
    }
}

impl Binning {
    pub fn range(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::Config(format!(
                "binning.bins must be ≥ 2, got {}",
                self.bins
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!(
                "binning range [{}, {}] must be finite and increasing",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_points() -> usize {
    crate::ensemble::DEFAULT_POINTS
}

fn default_e_gamma() -> f64 {
    1.0
}

/// Declarative description of one ensemble experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub sampler: Sampler,
    #[serde(default = "default_points")]
    pub n_points: usize,
    pub snapshot_times: Vec<f64>,
    /// One ratio `ω_k/ω` per vacuum mode; empty for the reduced model.
    #[serde(default)]
    pub vacuum_mode_ratios: Vec<f64>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub binning: Binning,
    /// Defaults to `out/<name>` when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Line energy used for the energy-unit dispersion files.
    #[serde(default = "default_e_gamma")]
    pub e_gamma: f64,
    /// Emit only the marginal histograms, not the per-point files.
    #[serde(default)]
    pub marginal_only: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        if self.n_points == 0 {
            return Err(Error::Config("n_points must be > 0".into()));
        }
        let w = self.sampler.w();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Config(format!(
                "sampler.w must be finite and > 0, got {w}"
            )));
        }
        if self.snapshot_times.is_empty() {
            return Err(Error::Config("snapshot_times must not be empty".into()));
        }
        crate::dynamics::validate_times(0.0, &self.snapshot_times)
            .map_err(|e| Error::Config(format!("snapshot_times: {e}")))?;
        crate::dynamics::ModeSpectrum::new(self.vacuum_mode_ratios.clone())
            .map_err(|e| Error::Config(format!("vacuum_mode_ratios: {e}")))?;
        self.integrator
            .validate()
            .map_err(|e| Error::Config(format!("integrator: {e}")))?;
        self.binning.validate()?;
        if !(self.e_gamma.is_finite() && self.e_gamma > 0.0) {
            return Err(Error::Config(format!(
                "e_gamma must be > 0, got {}",
                self.e_gamma
            )));
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| Path::new("out").join(&self.name))
    }
}

fn default_outer_levels() -> Vec<f64> {
    vec![1.7, 2.0, 2.5, 3.0, 4.0]
}

fn default_inner_levels() -> Vec<f64> {
    vec![1.3, 1.6, 2.0, 2.5, 3.0]
}

fn default_vertices() -> usize {
    400
}

/// Level sets of `G` traced as closed orbits, plus the Born density on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub name: String,
    /// Levels for the `|Q| > 1` regions; each must exceed the outer minimum.
    #[serde(default = "default_outer_levels")]
    pub outer_levels: Vec<f64>,
    /// Levels for the `0 < |Q| < 1` regions; each must exceed the inner minimum.
    #[serde(default = "default_inner_levels")]
    pub inner_levels: Vec<f64>,
    /// Polyline vertices per orbit, evenly spaced in `T` over one period.
    #[serde(default = "default_vertices")]
    pub vertices: usize,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    pub density_grid: DensityGrid,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub q_nodes: usize,
    pub yp_min: f64,
    pub yp_max: f64,
    pub yp_nodes: usize,
}

impl ContourConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        if self.vertices < 3 {
            return Err(Error::Config("vertices must be ≥ 3".into()));
        }
        if self.outer_levels.is_empty() && self.inner_levels.is_empty() {
            return Err(Error::Config(
                "at least one contour level is required".into(),
            ));
        }
        for (levels, region) in [
            (&self.outer_levels, crate::Region::Outer),
            (&self.inner_levels, crate::Region::Inner),
        ] {
            let (_, g_min) = crate::dynamics::region_minimum(region);
            if let Some(g) = levels.iter().find(|&&g| !(g.is_finite() && g > g_min)) {
                return Err(Error::Config(format!(
                    "{} level {g} must exceed the region minimum {g_min}",
                    region.as_str()
                )));
            }
        }
        self.integrator
            .validate()
            .map_err(|e| Error::Config(format!("integrator: {e}")))?;
        let d = &self.density_grid;
        let finite = [d.q_min, d.q_max, d.yp_min, d.yp_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || d.q_min >= d.q_max || d.yp_min >= d.yp_max || d.q_nodes < 2 || d.yp_nodes < 2
        {
            return Err(Error::Config(
                "density_grid needs finite increasing ranges and ≥ 2 nodes per axis".into(),
            ));
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| Path::new("out").join(&self.name))
    }
}

/// Anything `run` can execute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scenario {
    Ensemble(ScenarioConfig),
    Contours(ContourConfig),
}

impl Scenario {
    pub fn name(&self) -> &str {
        match self {
            Scenario::Ensemble(c) => &c.name,
            Scenario::Contours(c) => &c.name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Ensemble(c) => c.validate(),
            Scenario::Contours(c) => c.validate(),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        match self {
            Scenario::Ensemble(c) => c.output_dir(),
            Scenario::Contours(c) => c.output_dir(),
        }
    }

    pub fn set_output_dir(&mut self, dir: PathBuf) {
        match self {
            Scenario::Ensemble(c) => c.output_dir = Some(dir),
            Scenario::Contours(c) => c.output_dir = Some(dir),
        }
    }

    /// Parses a TOML scenario. The top-level `kind` key selects
    /// `"ensemble"` (default when absent) or `"contours"`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let kind = match table.remove("kind") {
            None => "ensemble".to_string(),
            Some(toml::Value::String(s)) => s,
            Some(other) => {
                return Err(Error::Config(format!(
                    "`kind` must be a string, got {other}"
                )))
            }
        };
        let value = toml::Value::Table(table);
        let scenario = match kind.as_str() {
            "ensemble" => Scenario::Ensemble(
                value
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?,
            ),
            "contours" => Scenario::Contours(
                value
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario kind `{other}` (expected `ensemble` or `contours`)"
                )))
            }
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
