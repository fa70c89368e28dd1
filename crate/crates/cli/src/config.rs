//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use bec1d_core::dynamics::StabilityConfig;
use bec1d_core::model::dimensionless_from_physical;
use bec1d_core::{Grid, ModelParams, PhysicalParams, SolverOptions};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ground,
    Sweep,
    Variational,
    Tf,
    Evolve,
    Verify,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ground => "ground",
            Mode::Sweep => "sweep",
            Mode::Variational => "variational",
            Mode::Tf => "tf",
            Mode::Evolve => "evolve",
            Mode::Verify => "verify",
        }
    }

    fn default_range(self) -> LambdaRange {
        let (start, stop, step) = match self {
            Mode::Variational => (0.0, 2.0, 0.01),
            Mode::Tf => (0.5, 10.0, 0.5),
            Mode::Verify => (0.0, 2.0, 0.1),
            _ => (0.0, 2.0, 0.05),
        };
        LambdaRange { start, stop, step }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Closed, uniformly spaced range `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LambdaRange {
    pub fn validate(&self) -> Result<(), CliError> {
        let finite = self.start.is_finite() && self.stop.is_finite() && self.step.is_finite();
        if !finite || self.step <= 0.0 || self.stop < self.start {
            return Err(CliError::config(format!(
                "lambdas: need finite start <= stop and step > 0, got {self:?}"
            )));
        }
        if (self.stop - self.start) / self.step > 1e6 {
            return Err(CliError::config("lambdas: more than 10^6 points"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationalSettings {
    /// Truncation order of the width equation.
    pub order: usize,
    pub legacy_lambda_cubed: bool,
}

impl Default for VariationalSettings {
    fn default() -> Self {
        VariationalSettings {
            order: bec1d_core::variational::DEFAULT_ORDER,
            legacy_lambda_cubed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Relative tolerance for the sweep relations.
    pub relation_tolerance: f64,
    pub delta: f64,
    pub t_final: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            relation_tolerance: 1e-3,
            delta: 1e-2,
            t_final: 10.0,
        }
    }
}

/// Dimensionless model input. `lambda` may be omitted by modes that scan it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub c_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalParams>,
    /// Takes precedence over `solver.grid`.
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<LambdaRange>,
    #[serde(default)]
    pub variational: VariationalSettings,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
}

/// Command-line values that replace fields of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub lambda: Option<f64>,
    pub c_omega: Option<f64>,
    pub grid_l: Option<f64>,
    pub grid_n: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

fn object<'a>(root: &'a mut Map<String, Value>, key: &str) -> Result<&'a mut Map<String, Value>, CliError> {
    root.entry(key)
        .or_insert_with(|| Value::Object(Map::new()))
        .as_object_mut()
        .ok_or_else(|| CliError::config(format!("`{key}` must be an object")))
}

impl Overrides {
    fn apply(&self, value: &mut Value) -> Result<(), CliError> {
        let root = value
            .as_object_mut()
            .ok_or_else(|| CliError::config("top level must be a JSON object"))?;
        if let Some(mode) = self.mode {
            root.insert("mode".into(), json!(mode.as_str()));
        }
        if self.lambda.is_some() || self.c_omega.is_some() {
            let model = object(root, "model")?;
            if let Some(lambda) = self.lambda {
                model.insert("lambda".into(), json!(lambda));
            }
            if let Some(c) = self.c_omega {
                model.insert("c_omega".into(), json!(c));
            }
        }
        if self.grid_l.is_some() || self.grid_n.is_some() {
            let defaults = Grid::default();
            let grid = object(root, "grid")?;
            grid.entry("half_width").or_insert(json!(defaults.half_width()));
            grid.entry("n_points").or_insert(json!(defaults.n_points()));
            if let Some(l) = self.grid_l {
                grid.insert("half_width".into(), json!(l));
            }
            if let Some(n) = self.grid_n {
                grid.insert("n_points".into(), json!(n));
            }
        }
        if let Some(out) = &self.out {
            root.insert("output_path".into(), json!(out));
        }
        if let Some(format) = self.format {
            root.insert(
                "output_format".into(),
                serde_json::to_value(format).expect("enum serializes"),
            );
        }
        Ok(())
    }
}

impl RunConfig {
    /// Parses JSON text, applies overrides, and validates.
    pub fn from_json(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("malformed JSON: {e}")))?;
        overrides.apply(&mut value)?;
        let mut config: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))?;
        config.solver.grid = config.grid;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path` (or starts from an empty object when `None`).
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?,
            None => "{}".to_string(),
        };
        RunConfig::from_json(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |e: bec1d_core::Error| CliError::config(e.to_string());
        self.solver.validate().map_err(field)?;
        self.stability.propagator.validate().map_err(field)?;
        if !(self.stability.delta.is_finite() && self.stability.delta >= 0.0) {
            return Err(CliError::config("stability.delta must be nonnegative"));
        }
        if let Some(r) = &self.lambdas {
            r.validate()?;
        }
        if self.model.is_some() && self.physical.is_some() {
            return Err(CliError::config("give either `model` or `physical`, not both"));
        }
        if let Some(p) = &self.physical {
            p.validate().map_err(field)?;
        }
        if let Some(m) = &self.model {
            ModelParams::new(m.lambda.unwrap_or(0.0), m.c_omega).map_err(field)?;
        }
        let order = self.variational.order;
        if !(2..=bec1d_core::variational::MAX_ORDER).contains(&order) {
            return Err(CliError::config(format!("variational.order out of range: {order}")));
        }
        Ok(())
    }

    /// Dimensionless parameters from either input path.
    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        match (&self.model, &self.physical) {
            (Some(m), _) => {
                let lambda = m.lambda.ok_or_else(|| {
                    CliError::config("missing field `lambda` (set `model.lambda` or --lambda)")
                })?;
                ModelParams::new(lambda, m.c_omega).map_err(|e| CliError::config(e.to_string()))
            }
            (None, Some(p)) => {
                let m = dimensionless_from_physical(p).map_err(|e| CliError::config(e.to_string()))?;
                info!(
                    "physical parameters reduce to lambda = {:.16e}, c_omega = {:.16e}",
                    m.lambda, m.c_omega
                );
                Ok(m)
            }
            (None, None) => Err(CliError::config(
                "missing field `model` (with `lambda` and `c_omega`) or `physical`",
            )),
        }
    }

    /// Coupling alone, for modes that scan `lambda`.
    pub fn c_omega(&self) -> Result<f64, CliError> {
        if self.model.is_none() && self.physical.is_none() {
            return Err(CliError::config("missing field `c_omega` (set `model.c_omega` or --c-omega)"));
        }
        match &self.model {
            Some(m) => Ok(m.c_omega),
            None => self.model_params().map(|m| m.c_omega),
        }
    }

    pub fn range(&self) -> LambdaRange {
        self.lambdas.unwrap_or_else(|| self.mode.default_range())
    }
}
