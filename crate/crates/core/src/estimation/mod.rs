//! Precision and Fisher-information estimation for both protocols.

pub mod fisher;
pub mod precision;

use serde::Serialize;

use crate::dynamics::Protocol;
use crate::noise::NoiseSpec;

pub use fisher::{fi_compare, histogram_fisher, mc_fisher, Binning, FIEstimate, FiRow, FisherConfig};
pub use precision::{
    advantage_law, compare, effective_trials, precision, precision_scan_beta, Accounting, AdvantageLaw, Background,
    BetaRow, Comparison, PrecisionResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RecordOutput {
    Precision(PrecisionResult),
    Fisher(FIEstimate),
}

/// One evaluated point: everything needed to recompute `output`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub protocol: Protocol,
    pub noise: NoiseSpec,
    pub n: u64,
    pub seed: Option<u64>,
    pub output: RecordOutput,
}
