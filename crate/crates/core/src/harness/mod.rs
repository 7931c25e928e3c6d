//! Experiment runner: configuration, validation, execution and persistence.
//!
//! Experiments are registered by name behind the [`Experiment`] trait and
//! selected by the `experiment` key of a config file.

pub mod config;
pub mod experiments;
pub mod output;
pub mod plot;

use std::path::PathBuf;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
pub use config::ExperimentConfig;
pub use output::{Artifact, RunManifest, Table};

/// One violated invariant, as reported by `validate` and in error JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl Violation {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: "ConfigError".into(),
            field: None,
            message: message.into(),
        }
    }
}

impl From<Error> for Violation {
    fn from(e: Error) -> Self {
        let field = match &e {
            Error::InvalidParameter { name, .. } => Some(name.to_string()),
            _ => None,
        };
        Self {
            kind: e.kind().into(),
            field,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Config(String),
    Invalid(Vec<Violation>),
    Runtime(Error),
    Io(String),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "ConfigError",
            HarnessError::Invalid(_) => "ValidationError",
            HarnessError::Runtime(e) => e.kind(),
            HarnessError::Io(_) => "IoError",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (message, violations) = match self {
            HarnessError::Config(m) | HarnessError::Io(m) => (m.clone(), vec![]),
            HarnessError::Invalid(v) => (format!("{} invariant(s) violated", v.len()), v.clone()),
            HarnessError::Runtime(e) => (e.to_string(), vec![Violation::from(e.clone())]),
        };
        serde_json::json!({ "error": self.kind(), "message": message, "violations": violations })
    }
}

impl std::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl std::error::Error for HarnessError {}

pub struct RunContext {
    pub seed: u64,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Every violated invariant of `params`; empty when the run can proceed.
    fn validate(&self, params: &toml::Table) -> Vec<Violation>;
    fn run(&self, params: &toml::Table, ctx: &RunContext) -> Result<Vec<Artifact>>;
}

/// Experiments with a typed parameter block. Implementors get [`Experiment`].
pub trait TypedExperiment: Send + Sync {
    const NAME: &'static str;
    const DESCRIPTION: &'static str;
    type Params: DeserializeOwned;

    fn check(params: &Self::Params) -> Vec<Error>;
    fn execute(params: &Self::Params, ctx: &RunContext) -> Result<Vec<Artifact>>;
}

impl<T: TypedExperiment> Experiment for T {
    fn name(&self) -> &'static str {
        T::NAME
    }

    fn description(&self) -> &'static str {
        T::DESCRIPTION
    }

    fn validate(&self, params: &toml::Table) -> Vec<Violation> {
        match config::typed::<T::Params>(params) {
            Err(msg) => vec![Violation::config(format!("params: {msg}"))],
            Ok(p) => {
                let mut out: Vec<Violation> = Vec::new();
                for v in T::check(&p).into_iter().map(Violation::from) {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
                out
            }
        }
    }

    fn run(&self, params: &toml::Table, ctx: &RunContext) -> Result<Vec<Artifact>> {
        let p = config::typed::<T::Params>(params).map_err(|m| Error::invalid("params", m))?;
        T::execute(&p, ctx)
    }
}

pub fn find(name: &str) -> Option<Box<dyn Experiment>> {
    experiments::registry().into_iter().find(|e| e.name() == name)
}

/// Every violated invariant of a config, without running it.
pub fn validate(config: &ExperimentConfig) -> Vec<Violation> {
    match find(&config.experiment) {
        None => vec![Violation::config(format!(
            "unknown experiment `{}`; see list-experiments",
            config.experiment
        ))],
        Some(exp) => exp.validate(&config.params),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> std::result::Result<(RunManifest, PathBuf), HarnessError> {
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(HarnessError::Invalid(violations));
    }
    let exp = find(&config.experiment).expect("validated");

    let mut effective = config.clone();
    effective.seed = opts.seed.unwrap_or(config.seed);
    let dir = config.resolve_output_dir(opts.out.as_deref());
    effective.output_dir = dir.clone();
    let workers = opts
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Io(format!("cannot start worker pool: {e}")))?;

    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let timer = Instant::now();
    let ctx = RunContext { seed: effective.seed };
    let artifacts = pool
        .install(|| exp.run(&config.params, &ctx))
        .map_err(HarnessError::Runtime)?;
    let files = output::write_artifacts(&dir, &artifacts).map_err(|e| HarnessError::Io(e.to_string()))?;

    let hashed = serde_json::to_vec(&effective).map_err(|e| HarnessError::Io(e.to_string()))?;
    let manifest = RunManifest {
        experiment: config.experiment.clone(),
        config_sha256: output::sha256_hex(&hashed),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: effective.seed,
        workers,
        started_at,
        wall_clock_seconds: timer.elapsed().as_secs_f64(),
        files,
    };
    output::write_manifest(&dir, &manifest).map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok((manifest, dir))
}
