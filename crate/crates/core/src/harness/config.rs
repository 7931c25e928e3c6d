//! Experiment configuration files.
//!
//! ```toml
//! experiment = "qfi-scan"
//! seed = 7
//! output_dir = "out/qfi"
//!
//! [params]
//! a = 1.0
//! energy = 0.5
//! lambda = 0.01
//! deltas = [0.5, 0.3, 0.1]
//! ```
//!
//! Complex parameters accept either a number or a `[re, im]` pair.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Probe, SensorConfig};
use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "NHSENSE_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub params: toml::Table,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {}", path.display(), e.message()))
    }

    /// `--out` beats the environment, which beats the file.
    pub fn resolve_output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexParam {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexParam {
    pub fn value(self) -> C64 {
        match self {
            ComplexParam::Real(x) => c(x, 0.0),
            ComplexParam::Pair([re, im]) => c(re, im),
        }
    }
}

impl From<f64> for ComplexParam {
    fn from(x: f64) -> Self {
        ComplexParam::Real(x)
    }
}

/// Sensor parameters; `delta` may be left out by experiments that sweep it,
/// and `time` defaults to the quarter period `pi / (2 Re E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorParams {
    pub a: ComplexParam,
    #[serde(default)]
    pub delta: Option<ComplexParam>,
    pub energy: ComplexParam,
    pub lambda: f64,
    #[serde(default)]
    pub time: Option<f64>,
    #[serde(default)]
    pub probe: Probe,
}

impl SensorParams {
    pub fn time(&self) -> f64 {
        self.time.unwrap_or(FRAC_PI_2 / self.energy.value().re)
    }

    pub fn build(&self, delta: Option<f64>) -> Result<SensorConfig> {
        let delta = match (delta, self.delta) {
            (Some(d), _) => c(d, 0.0),
            (None, Some(d)) => d.value(),
            (None, None) => return Err(Error::invalid("delta", "missing")),
        };
        Ok(SensorConfig::new(self.a.value(), delta, self.energy.value(), self.lambda, self.time())?.with_probe(self.probe))
    }
}

/// Deserialize a typed parameter block out of the free-form table.
pub fn typed<P: serde::de::DeserializeOwned>(params: &toml::Table) -> std::result::Result<P, String> {
    toml::Value::Table(params.clone()).try_into().map_err(|e: toml::de::Error| e.message().to_string())
}
