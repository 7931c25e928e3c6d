//! State-preparation-and-measurement bias.

use serde::{Deserialize, Serialize};

use super::{check_trials, ratio, Counts, NoiseModel, NuSampler, VarianceSplit};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutBias {
    /// Probability of reading |0> as |1>.
    pub kappa0: f64,
    /// Probability of reading |1> as |0>.
    pub kappa1: f64,
}

impl ReadoutBias {
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for (name, k) in [("kappa0", self.kappa0), ("kappa1", self.kappa1)] {
            if !(0.0..=1.0).contains(&k) {
                out.push(Error::invalid(name, format!("must lie in [0, 1], got {k}")));
            }
        }
        if !(self.kappa0 + self.kappa1 < 1.0) {
            out.push(Error::invalid(
                "kappa0 + kappa1",
                format!("must be below 1 for a monotone readout, got {}", self.kappa0 + self.kappa1),
            ));
        }
        out
    }
}

/// Probability of recording outcome 0 when the true probability is `p0`.
pub fn biased_prob(p0: f64, bias: &ReadoutBias) -> f64 {
    p0 * (1.0 - bias.kappa0) + (1.0 - p0) * bias.kappa1
}

/// Systematic error `p - p0 = kappa1 - (kappa0 + kappa1) p0`.
pub fn bias_value(p0: f64, bias: &ReadoutBias) -> f64 {
    bias.kappa1 - (bias.kappa0 + bias.kappa1) * p0
}

struct BiasedRatio {
    bias: ReadoutBias,
    n_t: f64,
}

impl NuSampler for BiasedRatio {
    fn fill(&self, s: f64, out: &mut [f64], rng: &mut Stream) {
        let s = biased_prob(s.clamp(0.0, 1.0), &self.bias);
        let (c0, c1) = (Counts::new(s * self.n_t), Counts::new((1.0 - s) * self.n_t));
        for v in out.iter_mut() {
            let n0 = c0.draw(rng);
            let n1 = c1.draw(rng);
            *v = ratio(n0, n0 + n1);
        }
    }
}

impl NoiseModel for ReadoutBias {
    fn name(&self) -> &'static str {
        "readout-bias"
    }

    fn variance_split(&self, p0: f64, n: u64) -> Result<VarianceSplit> {
        let p = biased_prob(p0, self);
        Ok(VarianceSplit {
            clt: p * (1.0 - p) / n.max(1) as f64,
            nclt: bias_value(p0, self).powi(2),
        })
    }

    fn nu_sampler(&self, n_t: f64) -> Result<Box<dyn NuSampler>> {
        check_trials(n_t)?;
        Ok(Box::new(BiasedRatio { bias: *self, n_t }))
    }
}
