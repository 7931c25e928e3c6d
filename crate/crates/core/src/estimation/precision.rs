//! Error propagation `delta lambda = sigma / chi` with resource accounting for
//! the post-selected protocol.

use serde::{Deserialize, Serialize};

use crate::dilation::{evolve_dilated, DilationConfig};
use crate::dynamics::{self, Protocol, SensorConfig};
use crate::error::{Error, Result};
use crate::noise::correlated::slope;
use crate::noise::{CorrelatedNoiseSpec, NoiseModel};

/// How many of the `N` trials a post-selected protocol gets to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accounting {
    /// `max(1, round(N P_s))` with `P_s` from the dilation.
    #[default]
    PostSelection,
    /// `max(1, round(N / A^2))`.
    Amplification,
    /// All `N` trials count, as if every post-selection succeeded.
    PostSelectedTrials,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionResult {
    pub delta_lambda: f64,
    pub sigma_clt: f64,
    pub sigma_nclt: f64,
    pub chi: f64,
    pub n_effective: u64,
    pub success_prob: f64,
}

/// Trials left after post-selection, and the success probability used.
pub fn effective_trials(protocol: &Protocol, n: u64, accounting: Accounting) -> Result<(u64, f64)> {
    let cfg = match protocol {
        Protocol::Hermitian { .. } => return Ok((n, 1.0)),
        Protocol::NonHermitian(cfg) => cfg,
    };
    let n_f = n as f64;
    Ok(match accounting {
        Accounting::PostSelection => {
            let ps = evolve_dilated(&DilationConfig::new(*cfg))?.success_prob;
            (((n_f * ps).round() as u64).max(1), ps)
        }
        Accounting::Amplification => {
            let amp = dynamics::amplification(cfg)?;
            let keep = 1.0 / (amp * amp);
            (((n_f * keep).round() as u64).max(1), keep)
        }
        Accounting::PostSelectedTrials => (n, 1.0),
    })
}

pub fn precision(protocol: &Protocol, noise: &dyn NoiseModel, n: u64, accounting: Accounting) -> Result<PrecisionResult> {
    let chi = protocol.susceptibility()?;
    if !(chi > 0.0) {
        return Err(Error::ZeroSusceptibility);
    }
    let (n_effective, success_prob) = effective_trials(protocol, n, accounting)?;
    let v = noise.variance_split(protocol.prob()?, n_effective)?;
    Ok(PrecisionResult {
        delta_lambda: v.total().sqrt() / chi,
        sigma_clt: v.clt.sqrt(),
        sigma_nclt: v.nclt.sqrt(),
        chi,
        n_effective,
        success_prob,
    })
}

/// Background shared by the precision scans: amplitude, per-shot scale and
/// readout contrast of the correlated noise, with gamma set from beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Background {
    pub c: f64,
    pub sigma_xi: f64,
    #[serde(default = "one")]
    pub contrast: f64,
    #[serde(default)]
    pub sigma_shot: f64,
}

fn one() -> f64 {
    1.0
}

impl Background {
    pub fn at_beta(&self, beta: f64) -> CorrelatedNoiseSpec {
        CorrelatedNoiseSpec::from_beta(beta, self.c, self.sigma_xi, self.contrast).with_shot_noise(self.sigma_shot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub hermitian: PrecisionResult,
    pub non_hermitian: PrecisionResult,
    /// `delta lambda_nH / delta lambda_H`.
    pub ratio: f64,
}

/// Both protocols at matched `lambda` and `t` under the same noise.
pub fn compare(sensor: &SensorConfig, noise: &dyn NoiseModel, n: u64, accounting: Accounting) -> Result<Comparison> {
    let herm = Protocol::Hermitian {
        lambda: sensor.lambda,
        time: sensor.time,
    };
    let hermitian = precision(&herm, noise, n, accounting)?;
    let non_hermitian = precision(&Protocol::NonHermitian(*sensor), noise, n, accounting)?;
    Ok(Comparison {
        hermitian,
        non_hermitian,
        ratio: non_hermitian.delta_lambda / hermitian.delta_lambda,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaRow {
    pub beta: f64,
    pub gamma: f64,
    pub comparison: Comparison,
}

pub fn precision_scan_beta(
    sensor: &SensorConfig,
    background: &Background,
    betas: &[f64],
    n: u64,
    accounting: Accounting,
) -> Result<Vec<BetaRow>> {
    betas
        .iter()
        .map(|&beta| {
            let noise = background.at_beta(beta);
            Ok(BetaRow {
                beta,
                gamma: 2.0 - beta,
                comparison: compare(sensor, &noise, n, accounting)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdvantageRow {
    pub delta: f64,
    pub amplification: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageLaw {
    pub rows: Vec<AdvantageRow>,
    /// Slope of `log ratio` against `log A`.
    pub slope: f64,
}

/// Sweep `delta` to vary the amplification at fixed noise and `N`.
pub fn advantage_law(
    sensor: &SensorConfig,
    noise: &dyn NoiseModel,
    deltas: &[f64],
    n: u64,
    accounting: Accounting,
) -> Result<AdvantageLaw> {
    let rows = deltas
        .iter()
        .map(|&d| {
            let s = sensor.with_delta(crate::linalg::re(d));
            Ok(AdvantageRow {
                delta: d,
                amplification: dynamics::amplification(&s)?,
                ratio: compare(&s, noise, n, accounting)?.ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() < 2 {
        return Err(Error::InsufficientGrid("advantage law needs at least two delta values".into()));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.amplification.ln(), r.ratio.ln())).collect();
    Ok(AdvantageLaw { slope: slope(&pts), rows })
}
