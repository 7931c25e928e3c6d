//! Technical-noise models.
//!
//! Each model answers two questions: how the variance of an estimated
//! probability splits into a part that averages down as `1/N` and a floor
//! that does not, and how the ratio observable `nu = n0 / (n0 + n1)` of a
//! photon-counting readout is corrupted.
//!
//! Models are selected by name through [`NoiseSpec`], whose `model` tag is
//! the registry key.

pub mod correlated;
pub mod offset;
pub mod readout;
pub mod saturation;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

pub use correlated::{sample_correlated_shots, CorrelatedNoiseSpec, CorrelatedSampler};
pub use offset::{offset_precision, OffsetPrecision, OffsetSpec};
pub use readout::{bias_value, biased_prob, ReadoutBias};
pub use saturation::{sample_saturated_pixel, saturation_mean_var, SaturationMoments, SaturationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VarianceSplit {
    pub clt: f64,
    pub nclt: f64,
}

impl VarianceSplit {
    pub fn total(&self) -> f64 {
        self.clt + self.nclt
    }
}

pub trait NoiseModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Variance of the probability estimate built from `n` trials at true
    /// probability `p0`.
    fn variance_split(&self, p0: f64, n: u64) -> Result<VarianceSplit>;

    /// Sampler of the ratio observable for `n_t` expected detection events.
    fn nu_sampler(&self, n_t: f64) -> Result<Box<dyn NuSampler>>;
}

pub trait NuSampler: Send + Sync {
    /// Fill `out` with independent draws of `nu` at state-|0> probability `s`.
    fn fill(&self, s: f64, out: &mut [f64], rng: &mut Stream);
}

/// Poisson counts that tolerate a zero mean.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Counts(Option<Poisson<f64>>);

impl Counts {
    pub(crate) fn new(mean: f64) -> Self {
        Counts(if mean > 0.0 { Poisson::new(mean).ok() } else { None })
    }

    pub(crate) fn draw(&self, rng: &mut Stream) -> f64 {
        self.0.map_or(0.0, |d| d.sample(rng))
    }
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.5
    } else {
        num / den
    }
}

pub(crate) fn check_trials(n_t: f64) -> Result<()> {
    if !(n_t.is_finite() && n_t > 0.0) {
        return Err(Error::invalid("n_t", format!("expected detection events must be positive, got {n_t}")));
    }
    Ok(())
}

/// Shot noise only.
#[derive(Debug, Clone, Copy, Default)]
pub struct Noiseless;

struct PoissonRatio {
    n_t: f64,
}

impl NuSampler for PoissonRatio {
    fn fill(&self, s: f64, out: &mut [f64], rng: &mut Stream) {
        let s = s.clamp(0.0, 1.0);
        let (c0, c1) = (Counts::new(s * self.n_t), Counts::new((1.0 - s) * self.n_t));
        for v in out.iter_mut() {
            let n0 = c0.draw(rng);
            let n1 = c1.draw(rng);
            *v = ratio(n0, n0 + n1);
        }
    }
}

impl NoiseModel for Noiseless {
    fn name(&self) -> &'static str {
        "none"
    }

    fn variance_split(&self, p0: f64, n: u64) -> Result<VarianceSplit> {
        Ok(VarianceSplit {
            clt: p0 * (1.0 - p0) / n.max(1) as f64,
            nclt: 0.0,
        })
    }

    fn nu_sampler(&self, n_t: f64) -> Result<Box<dyn NuSampler>> {
        check_trials(n_t)?;
        Ok(Box::new(PoissonRatio { n_t }))
    }
}

/// Serialized noise selection; the `model` field picks the implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum NoiseSpec {
    None,
    ReadoutBias(ReadoutBias),
    Correlated(CorrelatedNoiseSpec),
    Offset(OffsetSpec),
    Saturation(SaturationSpec),
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::None
    }
}

/// Registered model names with a one-line description.
pub const REGISTRY: &[(&str, &str)] = &[
    ("none", "Poisson shot noise only"),
    ("readout-bias", "asymmetric state misidentification kappa0, kappa1"),
    ("correlated", "power-law correlated background C(d) = c d^-gamma"),
    ("offset", "calibration offset zeta and fluctuating control kappa"),
    ("saturation", "photon-counting pixel with saturating response"),
];

impl NoiseSpec {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseSpec::None => "none",
            NoiseSpec::ReadoutBias(_) => "readout-bias",
            NoiseSpec::Correlated(_) => "correlated",
            NoiseSpec::Offset(_) => "offset",
            NoiseSpec::Saturation(_) => "saturation",
        }
    }

    /// Every violated invariant, empty when the spec is usable.
    pub fn violations(&self) -> Vec<Error> {
        match self {
            NoiseSpec::None => Vec::new(),
            NoiseSpec::ReadoutBias(s) => s.violations(),
            NoiseSpec::Correlated(s) => s.violations(),
            NoiseSpec::Offset(s) => s.violations(),
            NoiseSpec::Saturation(s) => s.violations(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn NoiseModel>> {
        self.validate()?;
        Ok(match self {
            NoiseSpec::None => Box::new(Noiseless),
            NoiseSpec::ReadoutBias(s) => Box::new(*s),
            NoiseSpec::Correlated(s) => Box::new(*s),
            NoiseSpec::Offset(s) => Box::new(*s),
            NoiseSpec::Saturation(s) => Box::new(*s),
        })
    }
}

/// Standard normal draw.
pub(crate) fn gauss(rng: &mut Stream) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}
