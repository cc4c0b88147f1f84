//! The experiment configuration: a single JSON document with sections
//! `surface`, `grid`, `hypotheses`, `tuning`, `heat`, `j`, `verify`, `output`
//! and an optional `sweep`.

use std::path::{Path, PathBuf};

use liyau_core::audit::GeometricHypotheses;
use liyau_core::constants::{admissible_alpha, admissible_beta, exponent_c, Tuning};
use liyau_core::heat::{HeatConfig, InitialData, Mode, DEFAULT_FLOOR};
use liyau_core::jsolver::{JConfig, DEFAULT_S_INTERVALS};
use liyau_core::verify::{Window, DEFAULT_T_MIN};
use liyau_core::{Grid, WarpedSurface, DIM};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: WarpedSurface,
    #[serde(default)]
    pub grid: GridSpec,
    pub hypotheses: GeometricHypotheses,
    #[serde(default)]
    pub tuning: TuningSpec,
    #[serde(default)]
    pub heat: HeatSpec,
    #[serde(default)]
    pub j: JSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Worker threads for sweeps; results do not depend on it.
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub nr: usize,
    pub ntheta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nr: 65, ntheta: 64 }
    }
}

/// A number, or `"auto"` for the derived default.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Choice {
    Value(f64),
    Auto(Auto),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Auto {
    Auto,
}

impl Choice {
    pub const AUTO: Choice = Choice::Auto(Auto::Auto);

    pub fn resolve(self, auto: f64) -> f64 {
        match self {
            Choice::Value(v) => v,
            Choice::Auto(_) => auto,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TuningSpec {
    pub xi: f64,
    pub alpha: Choice,
    pub beta: Choice,
    /// Stand-in for the unspecified constant in the C̃3-form lower bound of `J`.
    pub c3_override: f64,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self { xi: 0.5, alpha: Choice::AUTO, beta: Choice::AUTO, c3_override: 1.0 }
    }
}

impl TuningSpec {
    /// `"auto"` resolves to `α_max` and `β_max/2` for the given `H`.
    pub fn resolve(&self, h: f64) -> Result<Tuning, HarnessError> {
        let alpha = self.alpha.resolve(admissible_alpha(self.xi, h)?);
        let beta = self.beta.resolve(0.5 * admissible_beta(self.xi, h, DIM)?);
        Ok(Tuning { xi: self.xi, alpha, beta })
    }
}

/// Snapshot times: an explicit list or a uniform spacing up to `t_final`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SnapshotSpec {
    Every { every: f64 },
    List(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct HeatSpec {
    pub dt: f64,
    pub t_final: f64,
    pub snapshots: SnapshotSpec,
    pub initial: InitialData,
    #[serde(default)]
    pub startup_steps: usize,
}

impl Default for HeatSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            snapshots: SnapshotSpec::Every { every: 0.01 },
            initial: InitialData::Trigonometric {
                constant: 2.0,
                modes: vec![Mode { radial: 1, angular: 0, amplitude: 1.0, phase: 0.0 }],
                floor: DEFAULT_FLOOR,
            },
            startup_steps: 0,
        }
    }
}

impl HeatSpec {
    pub fn times(&self) -> Result<Vec<f64>, HarnessError> {
        match &self.snapshots {
            SnapshotSpec::List(v) => Ok(v.clone()),
            SnapshotSpec::Every { every } => {
                if !(*every > 0.0) {
                    return Err(HarnessError::Config(format!("heat.snapshots.every = {every} must be positive")));
                }
                let count = (self.t_final / every + 1e-9).floor() as usize;
                Ok((1..=count).map(|k| k as f64 * every).collect())
            }
        }
    }

    pub fn build(&self, grid: Grid) -> Result<HeatConfig, HarnessError> {
        let mut cfg = HeatConfig::new(grid, self.dt, self.t_final, self.times()?, self.initial.clone());
        cfg.startup_steps = self.startup_steps;
        Ok(cfg)
    }
}

/// Which lower bound for `J` enters the theorem check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundRoute {
    Desk,
    C3Form,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct JSpec {
    /// Exponent `c`; `"auto"` takes `(3 + 1/α)/β` from the tuning.
    pub c: Choice,
    pub dt: f64,
    pub t_final: f64,
    pub duhamel_intervals: usize,
    pub lower_bound: BoundRoute,
    /// Number of evenly spaced `J` snapshots written by `jsolve`.
    pub snapshots: usize,
}

impl Default for JSpec {
    fn default() -> Self {
        Self { c: Choice::AUTO, dt: 1e-3, t_final: 0.1, duhamel_intervals: DEFAULT_S_INTERVALS, lower_bound: BoundRoute::Desk, snapshots: 10 }
    }
}

impl JSpec {
    pub fn build(&self, grid: Grid, tuning: &Tuning) -> JConfig {
        JConfig { c: self.c.resolve(exponent_c(tuning.alpha, tuning.beta)), dt: self.dt, t_final: self.t_final, grid }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Theorem,
    Classic,
    Probe,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub mode: VerifyMode,
    pub t_min: f64,
    /// Defaults to the end of the heat run.
    #[serde(default)]
    pub t_max: Option<f64>,
    pub classic_alpha: f64,
    /// Check the estimate even when a hypothesis audit fails.
    pub force: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { mode: VerifyMode::Theorem, t_min: DEFAULT_T_MIN, t_max: None, classic_alpha: 1.05, force: false }
    }
}

impl VerifySpec {
    pub fn window(&self, t_final: f64) -> Result<Window, HarnessError> {
        Ok(Window::new(self.t_min, self.t_max.unwrap_or(t_final))?)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub snapshot_format: SnapshotFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), snapshot_format: SnapshotFormat::Csv }
    }
}

/// Parameter ranges of a sweep. Empty ranges give an empty table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub xi: Vec<f64>,
    pub alpha: Vec<Choice>,
    pub beta: Vec<Choice>,
    /// Named surfaces; defaults to the configured one.
    #[serde(default)]
    pub surfaces: Vec<NamedSurface>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NamedSurface {
    pub name: String,
    pub surface: WarpedSurface,
    /// Hypotheses for this surface; defaults to the top-level ones.
    #[serde(default)]
    pub hypotheses: Option<GeometricHypotheses>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    pub fn grid(&self) -> Result<Grid, HarnessError> {
        Ok(Grid::new(&self.surface, self.grid.nr, self.grid.ntheta)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.grid()?;
        self.hypotheses.validate(DIM)?;
        self.tuning.resolve(self.hypotheses.h)?;
        if !(self.tuning.c3_override > 0.0) {
            return Err(HarnessError::Config(format!("tuning.c3_override = {} must be positive", self.tuning.c3_override)));
        }
        if !(self.verify.t_min > 0.0) {
            return Err(HarnessError::Config(format!("verify.t_min = {} must be positive", self.verify.t_min)));
        }
        if self.threads == 0 {
            return Err(HarnessError::Config("threads must be at least 1".into()));
        }
        self.heat.times()?;
        Ok(())
    }

    /// Copy with every length multiplied by `lambda` and every time by `lambda²`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self, HarnessError> {
        let l2 = lambda * lambda;
        let mut c = self.clone();
        c.surface = self.surface.rescaled(lambda)?;
        c.hypotheses = self.hypotheses.rescaled(lambda);
        c.heat.dt *= l2;
        c.heat.t_final *= l2;
        c.heat.snapshots = match &self.heat.snapshots {
            SnapshotSpec::Every { every } => SnapshotSpec::Every { every: every * l2 },
            SnapshotSpec::List(v) => SnapshotSpec::List(v.iter().map(|t| t * l2).collect()),
        };
        c.heat.initial = match &self.heat.initial {
            InitialData::PointMass { r, theta, mass, background } => {
                InitialData::PointMass { r: r * lambda, theta: *theta, mass: *mass, background: *background }
            }
            other => other.clone(),
        };
        c.j.dt *= l2;
        c.j.t_final *= l2;
        c.verify.t_min *= l2;
        c.verify.t_max = self.verify.t_max.map(|t| t * l2);
        Ok(c)
    }
}
