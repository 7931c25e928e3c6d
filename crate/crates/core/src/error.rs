use thiserror::Error;

/// Errors raised by the simulation, noise and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate eigenvector frame: |1 + a| = {0:e} is below 1e-12")]
    DegenerateFrame(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("evolved state has vanishing norm ({0:e})")]
    ZeroNorm(f64),

    #[error("finite-difference step fell below {floor:e} without converged extrapolation")]
    StepUnderflow { floor: f64 },

    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("dilated Hamiltonian is not Hermitian (max deviation {0:e})")]
    DilationNotHermitian(f64),

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("covariance matrix is not positive semidefinite at n = {0}")]
    NotPositiveSemidefinite(usize),

    #[error("susceptibility vanishes at the operating point")]
    ZeroSusceptibility,

    #[error("every histogram bin fell below the probability floor")]
    AllMassDropped,

    #[error("observable is constant across the sample ensemble")]
    DegenerateHistogram,
}

impl Error {
    /// Stable machine-readable tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateFrame(_) => "DegenerateFrame",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::ZeroNorm(_) => "ZeroNorm",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::MetricViolation(_) => "MetricViolation",
            Error::DilationNotHermitian(_) => "DilationNotHermitian",
            Error::InsufficientGrid(_) => "InsufficientGrid",
            Error::NotPositiveSemidefinite(_) => "NotPositiveSemidefinite",
            Error::ZeroSusceptibility => "ZeroSusceptibility",
            Error::AllMassDropped => "AllMassDropped",
            Error::DegenerateHistogram => "DegenerateHistogram",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
