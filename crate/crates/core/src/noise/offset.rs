//! Calibration offsets and fluctuating control parameters.
//!
//! The readout depends on a nuisance parameter `zeta` known only to within
//! `delta_zeta`, and on a control `kappa` that jitters by `delta_kappa` from
//! shot to shot. Linearised about the reference point, the estimator error is
//! `[dp/dzeta (zeta_p - zeta_r) + dp/dkappa mean(kappa_i - kappa) + mean(eta_i)] / (dp/dlambda)`.

use serde::{Deserialize, Serialize};

use super::{check_trials, gauss, ratio, Counts, NoiseModel, NuSampler, VarianceSplit};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetSpec {
    /// Response slope of the standalone offset-precision formula. Protocols
    /// supply their own susceptibility instead.
    #[serde(default)]
    pub dp_dlambda: Option<f64>,
    pub dp_dzeta: f64,
    #[serde(default)]
    pub dp_dkappa: f64,
    pub delta_zeta: f64,
    #[serde(default)]
    pub delta_kappa: f64,
    /// Per-shot readout spread. Defaults to the Bernoulli width `sqrt(p (1 - p))`.
    #[serde(default)]
    pub delta_p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetPrecision {
    pub dlambda_sq: f64,
    pub var_clt: f64,
    pub var_nclt: f64,
}

impl OffsetSpec {
    /// Pure calibration floor: only `zeta` is uncertain.
    pub fn floor_only(dp_dzeta: f64, delta_zeta: f64) -> Self {
        Self {
            dp_dlambda: None,
            dp_dzeta,
            dp_dkappa: 0.0,
            delta_zeta,
            delta_kappa: 0.0,
            delta_p: None,
        }
    }

    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for (name, v) in [("delta_zeta", self.delta_zeta), ("delta_kappa", self.delta_kappa)] {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if let Some(dp) = self.delta_p {
            if !(dp >= 0.0 && dp.is_finite()) {
                out.push(Error::invalid("delta_p", format!("must be non-negative, got {dp}")));
            }
        }
        for (name, v) in [("dp_dzeta", self.dp_dzeta), ("dp_dkappa", self.dp_dkappa)] {
            if !v.is_finite() {
                out.push(Error::invalid(name, "must be finite"));
            }
        }
        out
    }

    fn split(&self, readout_var: f64, n: u64) -> VarianceSplit {
        VarianceSplit {
            clt: (readout_var + (self.dp_dkappa * self.delta_kappa).powi(2)) / n.max(1) as f64,
            nclt: (self.dp_dzeta * self.delta_zeta).powi(2),
        }
    }
}

/// Mean squared error of the linearised estimator after `n` shots, in
/// `lambda` units, with its probability-level decomposition.
pub fn offset_precision(spec: &OffsetSpec, n: u64) -> Result<OffsetPrecision> {
    let slope = spec
        .dp_dlambda
        .ok_or_else(|| Error::invalid("dp_dlambda", "required for the standalone precision"))?;
    if slope == 0.0 {
        return Err(Error::ZeroSusceptibility);
    }
    let dp = spec
        .delta_p
        .ok_or_else(|| Error::invalid("delta_p", "required for the standalone precision"))?;
    let v = spec.split(dp * dp, n);
    Ok(OffsetPrecision {
        dlambda_sq: v.total() / (slope * slope),
        var_clt: v.clt,
        var_nclt: v.nclt,
    })
}

/// Each readout sees its own calibration draw and the shot-averaged control jitter.
struct OffsetRatio {
    spec: OffsetSpec,
    n_t: f64,
}

impl NuSampler for OffsetRatio {
    fn fill(&self, s: f64, out: &mut [f64], rng: &mut Stream) {
        let zeta_sd = self.spec.dp_dzeta * self.spec.delta_zeta;
        let kappa_sd = self.spec.dp_dkappa * self.spec.delta_kappa / self.n_t.sqrt();
        for v in out.iter_mut() {
            let shifted = (s + zeta_sd * gauss(rng) + kappa_sd * gauss(rng)).clamp(0.0, 1.0);
            let n0 = Counts::new(shifted * self.n_t).draw(rng);
            let n1 = Counts::new((1.0 - shifted) * self.n_t).draw(rng);
            *v = ratio(n0, n0 + n1);
        }
    }
}

impl NoiseModel for OffsetSpec {
    fn name(&self) -> &'static str {
        "offset"
    }

    fn variance_split(&self, p0: f64, n: u64) -> Result<VarianceSplit> {
        let readout = match self.delta_p {
            Some(dp) => dp * dp,
            None => p0 * (1.0 - p0),
        };
        Ok(self.split(readout, n))
    }

    fn nu_sampler(&self, n_t: f64) -> Result<Box<dyn NuSampler>> {
        check_trials(n_t)?;
        Ok(Box::new(OffsetRatio { spec: *self, n_t }))
    }
}
