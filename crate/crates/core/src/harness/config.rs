use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::sliding::SlidingConfig;

/// Methods the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Sliding,
    FgmBaseline,
    CatalystVr,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sliding => "SLIDING",
            Method::FgmBaseline => "FGM_BASELINE",
            Method::CatalystVr => "CATALYST_VR",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Problem parameter swept by a scaling study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    M,
    N,
    MuReg,
    /// Sets `mu_reg = 1/value`.
    InvMu,
    LgTarget,
    LambdaMaxTarget,
    Eps,
}

impl AxisName {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::config("axis.name", format!("unknown axis `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config("format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

/// One experiment: a problem family, the methods to run on it, and the seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub eps: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub axis: Option<Axis>,
    /// Tuning for SLIDING and CATALYST_VR; its `eps` is taken from the top level.
    #[serde(default)]
    pub sliding: Option<SlidingConfig>,
    /// Every method stops once `F(x) − F* ≤ gap_fraction · eps`.
    #[serde(default = "default_gap_fraction")]
    pub gap_fraction: f64,
    /// Iteration cap for every method's outermost loop.
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// When false, `wall_time_s` is written as 0 so repeated runs give
    /// identical bytes.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
}

fn default_max_iters() -> usize {
    1_000_000
}

fn default_gap_fraction() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::config(
                "<config>",
                format!("line {}, column {}: {e}", e.line(), e.column()),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Unreadable files are I/O errors;
    /// malformed or invalid contents are config errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::config("eps", format!("must be positive, got {}", self.eps)));
        }
        if !(self.gap_fraction > 0.0 && self.gap_fraction <= 1.0) {
            return Err(Error::config("gap_fraction", "must lie in (0, 1]"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters", "must be >= 1"));
        }
        if let Some(axis) = &self.axis {
            if axis.values.is_empty() {
                return Err(Error::config("axis.values", "must not be empty"));
            }
            for &v in &axis.values {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::config("axis.values", format!("values must be positive, got {v}")));
                }
                let integral = matches!(axis.name, AxisName::M | AxisName::N);
                if integral && v.fract() != 0.0 {
                    return Err(Error::config("axis.values", format!("`{:?}` needs integers, got {v}", axis.name)));
                }
            }
        }
        if let Some(s) = &self.sliding {
            if s.eps != 0.0 && s.eps != self.eps {
                return Err(Error::config("sliding.eps", "set eps at the top level only"));
            }
            self.sliding_config().validate().map_err(|e| match e {
                Error::Config { field, message } => Error::config(format!("sliding.{field}"), message),
                other => other,
            })?;
        }
        self.problem_for(self.seeds[0], self.axis.as_ref().map(|a| a.values[0]))?
            .validate()
    }

    pub fn sliding_config(&self) -> SlidingConfig {
        let mut c = self.sliding.clone().unwrap_or_else(|| SlidingConfig::new(self.eps));
        c.eps = self.eps;
        c
    }

    /// Axis value points, or a single `None` without an axis.
    pub fn axis_points(&self) -> Vec<Option<f64>> {
        match &self.axis {
            Some(a) => a.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    /// Problem spec for one `(seed, axis value)` cell.
    pub fn problem_for(&self, seed: u64, axis_value: Option<f64>) -> Result<ProblemSpec> {
        let mut p = self.problem.clone();
        p.seed = seed;
        if let (Some(axis), Some(v)) = (&self.axis, axis_value) {
            match axis.name {
                AxisName::M => p.m = v as usize,
                AxisName::N => p.n = v as usize,
                AxisName::MuReg => p.mu_reg = v,
                AxisName::InvMu => p.mu_reg = 1.0 / v,
                AxisName::LgTarget => p.lg_target = Some(v),
                AxisName::LambdaMaxTarget => p.lambda_max_target = v,
                AxisName::Eps => p.eps = v,
            }
        }
        Ok(p)
    }

    /// Accuracy for a cell; an `eps` axis overrides the top-level value.
    pub fn eps_for(&self, axis_value: Option<f64>) -> f64 {
        match (&self.axis, axis_value) {
            (Some(Axis { name: AxisName::Eps, .. }), Some(v)) => v,
            _ => self.eps,
        }
    }

    pub fn gap_target_for(&self, axis_value: Option<f64>) -> f64 {
        self.gap_fraction * self.eps_for(axis_value)
    }
}
