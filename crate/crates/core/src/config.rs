//! JSON experiment files.
//!
//! ```json
//! {
//!   "system": {
//!     "omega": "2*pi",
//!     "a": [["1", "0"], ["1", "0"]],
//!     "b": [["1", "0"], ["0", "1"]],
//!     "h": [["1", "0"], ["0", "0"]]
//!   },
//!   "grid": { "steps": 2048 },
//!   "functional": ["sin(t)", "cos(t)"]
//! }
//! ```
//!
//! Matrix entries, the functional, observations and noise shapes are
//! expression strings in `t` (plain numbers are accepted too). The optional
//! `observation` block is one of `{"expressions": [...]}`,
//! `{"csv": "path"}` or `{"simulation": {...}}`; a top-level `simulation`
//! block drives the `simulate` command.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::observer::{Functional, NoiseModel, ObservationSystem, ObserverOptions};
use crate::ode::{Grid, DEFAULT_STEPS};
use crate::time_matrix::{ExprMatrix, PiecewiseLinear, SharedTimeMatrix};

/// A scalar leaf: a number or an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Number(x) => format!("{x:?}"),
            Scalar::Expr(s) => s.clone(),
        }
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Expr(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub a: Vec<Vec<Scalar>>,
    pub b: Vec<Vec<Scalar>>,
    pub h: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseConfig {
    None,
    Deterministic {
        shape: Vec<Scalar>,
    },
    Random {
        shape: Vec<Scalar>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub f: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_component: Option<Vec<Scalar>>,
    #[serde(default = "no_noise")]
    pub noise: NoiseConfig,
}

fn no_noise() -> NoiseConfig {
    NoiseConfig::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationConfig {
    Expressions(Vec<Scalar>),
    Csv(PathBuf),
    Simulation(SimulationConfig),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feas_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compat_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    /// True state, for error norms of a reconstruction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerances: ToleranceConfig,
}

fn is_default(t: &ToleranceConfig) -> bool {
    *t == ToleranceConfig::default()
}

/// Observed signal ready for reconstruction.
pub enum Observation {
    Signal(SharedTimeMatrix),
    Simulated(Simulation),
}

/// Everything needed to run `simulate_observation`.
pub struct Simulation {
    pub f: SharedTimeMatrix,
    pub kernel_component: Option<SharedTimeMatrix>,
    pub noise: NoiseModel,
}

/// A validated, evaluable experiment.
pub struct Experiment {
    pub system: ObservationSystem,
    pub grid: Grid,
    pub functional: Option<Functional>,
    pub observation: Option<Observation>,
    pub simulation: Option<Simulation>,
    pub truth: Option<SharedTimeMatrix>,
    pub options: ObserverOptions,
    /// Non-fatal remarks gathered while loading (e.g. resampled CSV data).
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Invalid(format!("config: {} at `{}`", e.inner(), e.path())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "singular-l1" => WORKED_L1,
            "singular-l2" => WORKED_L2,
            "oscillator" => OSCILLATOR,
            _ => {
                return Err(Error::Invalid(format!(
                    "unknown builtin `{name}` (expected one of {})",
                    BUILTINS.join(", ")
                )))
            }
        };
        Self::from_json(text)
    }

    /// Parses every expression and checks dimensions. Relative CSV paths are
    /// resolved against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<Experiment> {
        let s = &self.system;
        let omega = eval_constant(&s.omega, "system.omega")?;
        let a = matrix(&s.a, "system.a")?;
        let b = matrix(&s.b, "system.b")?;
        let h = matrix(&s.h, "system.h")?;
        for (declared, actual, what) in [
            (s.n, a.rows(), "system.n"),
            (s.r, b.cols(), "system.r"),
            (s.m, h.rows(), "system.m"),
        ] {
            if let Some(d) = declared {
                if d != actual {
                    return Err(Error::Dimension(format!("{what} = {d} but the matrices give {actual}")));
                }
            }
        }
        let system = ObservationSystem::new(a, b, h, omega)?;
        let steps = self.grid.map_or(DEFAULT_STEPS, |g| g.steps);
        let grid = Grid::new(omega, steps)?;

        let functional = match &self.functional {
            Some(l) => Some(Functional::new(vector(l, "functional")?)?),
            None => None,
        };
        let mut warnings = Vec::new();
        let observation = match &self.observation {
            None => None,
            Some(ObservationConfig::Expressions(y)) => Some(Observation::Signal(vector(y, "observation.expressions")?)),
            Some(ObservationConfig::Csv(path)) => {
                let path = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let (signal, warning) = read_observation_csv(&path, grid)?;
                warnings.extend(warning);
                Some(Observation::Signal(Arc::new(signal)))
            }
            Some(ObservationConfig::Simulation(sim)) => {
                Some(Observation::Simulated(simulation(sim, "observation.simulation")?))
            }
        };
        let simulation = match &self.simulation {
            Some(sim) => Some(simulation(sim, "simulation")?),
            None => None,
        };
        let truth = match &self.truth {
            Some(x) => Some(vector(x, "truth")?),
            None => None,
        };
        let defaults = ObserverOptions::default();
        let t = self.tolerances;
        let options = ObserverOptions {
            rank_tol: t.rank_tol.unwrap_or(defaults.rank_tol),
            feas_tol: t.feas_tol.unwrap_or(defaults.feas_tol),
            compat_tol: t.compat_tol.unwrap_or(defaults.compat_tol),
        };
        for (v, what) in [
            (options.rank_tol, "tolerances.rank_tol"),
            (options.feas_tol, "tolerances.feas_tol"),
            (options.compat_tol, "tolerances.compat_tol"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("{what} must be positive, got {v}")));
            }
        }
        Ok(Experiment {
            system,
            grid,
            functional,
            observation,
            simulation,
            truth,
            options,
            warnings,
        })
    }
}

pub const BUILTINS: [&str; 3] = ["singular-l1", "singular-l2", "oscillator"];

const WORKED_L1: &str = r#"{
  "system": {
    "omega": "2*pi",
    "a": [["1", "0"], ["1", "0"]],
    "b": [["1", "0"], ["0", "1"]],
    "h": [["1", "0"], ["0", "0"]]
  },
  "grid": { "steps": 2048 },
  "functional": ["sin(t)", "1"]
}"#;

const WORKED_L2: &str = r#"{
  "system": {
    "omega": "2*pi",
    "a": [["1", "0"], ["1", "0"]],
    "b": [["1", "0"], ["0", "1"]],
    "h": [["1", "0"], ["0", "0"]]
  },
  "grid": { "steps": 2048 },
  "functional": ["sin(t)", "cos(t)"]
}"#;

// Harmonic oscillator observed through rotating sensors. The periodic kernel
// is spanned by (cos t, −sin t), which H cannot see, and (sin t, cos t).
const OSCILLATOR: &str = r#"{
  "system": {
    "omega": "2*pi",
    "a": [["0", "1"], ["-1", "0"]],
    "b": [["1", "0"], ["0", "1"]],
    "h": [["sin(t)/20", "cos(t)/20"], ["sin(t)/2", "cos(t)/2"]]
  },
  "grid": { "steps": 2048 },
  "observation": {
    "expressions": ["0.05 + 0.0159155*t + 0.1*sin(t)", "0.5 + 0.159155*t + 0.1*sin(t)"]
  },
  "truth": ["cos(t)/2 + sin(t) + t*sin(t)/pi", "cos(t) + t*cos(t)/pi - sin(t)/2"],
  "simulation": {
    "f": ["cos(t)/pi", "sin(t)/pi"],
    "kernel_component": ["cos(t)/2", "-sin(t)/2"],
    "noise": { "kind": "deterministic", "shape": ["0.1*sin(t)", "0.1*sin(t)"] }
  }
}"#;

fn parse_scalar(s: &Scalar, path: &str) -> Result<Expr> {
    s.text()
        .parse::<Expr>()
        .map_err(|e| Error::Invalid(format!("{path}: {e}")))
}

fn eval_constant(s: &Scalar, path: &str) -> Result<f64> {
    let e = parse_scalar(s, path)?;
    if !e.is_constant() {
        return Err(Error::Invalid(format!("{path}: must not depend on t")));
    }
    e.eval(0.0).map_err(|e| Error::Invalid(format!("{path}: {e}")))
}

fn matrix(rows: &[Vec<Scalar>], path: &str) -> Result<SharedTimeMatrix> {
    let text: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(Scalar::text).collect()).collect();
    let m =
        ExprMatrix::parse(&text).map_err(|e| Error::Invalid(format!("{path}[{}][{}]: {}", e.row, e.col, e.source)))?;
    Ok(Arc::new(m))
}

fn vector(entries: &[Scalar], path: &str) -> Result<SharedTimeMatrix> {
    let text: Vec<String> = entries.iter().map(Scalar::text).collect();
    let m = ExprMatrix::vector(&text).map_err(|e| Error::Invalid(format!("{path}[{}]: {}", e.row, e.source)))?;
    Ok(Arc::new(m))
}

fn simulation(sim: &SimulationConfig, path: &str) -> Result<Simulation> {
    let f = vector(&sim.f, &format!("{path}.f"))?;
    let kernel_component = match &sim.kernel_component {
        Some(k) => Some(vector(k, &format!("{path}.kernel_component"))?),
        None => None,
    };
    let noise = match &sim.noise {
        NoiseConfig::None => NoiseModel::None,
        NoiseConfig::Deterministic { shape } => NoiseModel::Deterministic {
            shape: vector(shape, &format!("{path}.noise.shape"))?,
        },
        NoiseConfig::Random { shape, scale, seed } => NoiseModel::Random {
            shape: vector(shape, &format!("{path}.noise.shape"))?,
            scale: *scale,
            seed: *seed,
        },
    };
    Ok(Simulation {
        f,
        kernel_component,
        noise,
    })
}

/// Reads `t,y1..ym` samples. Returns the interpolant and a warning when the
/// sample times are not the grid nodes.
pub fn read_observation_csv(path: &Path, grid: Grid) -> Result<(PiecewiseLinear, Option<String>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?
        .clone();
    let m = headers.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=m).map(|j| format!("y{j}")))
        .collect();
    if m == 0 || headers.iter().map(str::trim).ne(expected.iter().map(String::as_str)) {
        return Err(Error::Invalid(format!(
            "{}: header must be t,y1..ym, got {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Invalid(format!("{} row {}: {e}", path.display(), line + 2)))?;
        if row.len() != m + 1 {
            return Err(Error::Invalid(format!(
                "{} row {}: expected {} fields",
                path.display(),
                line + 2,
                m + 1
            )));
        }
        times.push(row[0]);
        values.push(row[1..].to_vec());
    }
    let on_grid = times.len() == grid.len()
        && times
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - grid.t(i)).abs() <= 1e-9 * grid.omega().max(1.0));
    let warning = (!on_grid).then(|| {
        format!(
            "{}: {} samples do not match the {}-node grid; interpolating linearly",
            path.display(),
            times.len(),
            grid.len()
        )
    });
    Ok((PiecewiseLinear::new(times, values)?, warning))
}
