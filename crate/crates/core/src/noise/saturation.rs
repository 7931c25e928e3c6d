//! Photon-counting pixel with a saturating response.
//!
//! `N ~ Poisson(nbar)` photons produce the mean output
//! `mu(N) = k_max (1 - exp(-N / N_sat))`, read out with Gaussian spread
//! `sigma_pix`. Moments follow from the Poisson generating function
//! `E[a^N] = exp(nbar (a - 1))`.

use serde::{Deserialize, Serialize};

use super::{check_trials, gauss, ratio, Counts, NoiseModel, NuSampler, VarianceSplit};
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationSpec {
    pub k_max: f64,
    pub n_sat: f64,
    pub sigma_pix: f64,
    /// Mean incident photons. Precision calculations replace it with `p N`.
    #[serde(default)]
    pub nbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationMoments {
    pub mean_k: f64,
    pub var_k: f64,
    /// `Var_N(mu(N))`, the part of `var_k` beyond the pixel spread.
    pub saturation_term: f64,
}

impl SaturationSpec {
    pub fn new(k_max: f64, n_sat: f64, sigma_pix: f64, nbar: f64) -> Self {
        Self {
            k_max,
            n_sat,
            sigma_pix,
            nbar,
        }
    }

    pub fn with_nbar(mut self, nbar: f64) -> Self {
        self.nbar = nbar;
        self
    }

    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for (name, v) in [("k_max", self.k_max), ("n_sat", self.n_sat)] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("sigma_pix", self.sigma_pix), ("nbar", self.nbar)] {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(Error::invalid(name, format!("must be non-negative and finite, got {v}")));
            }
        }
        out
    }

    /// Mean pixel output for exactly `n` photons.
    pub fn pixel_response(&self, n: f64) -> f64 {
        -self.k_max * (-n / self.n_sat).exp_m1()
    }

    /// `d E[k] / d nbar`.
    pub fn mean_slope(&self) -> f64 {
        let q = (-1.0 / self.n_sat).exp_m1();
        -self.k_max * q * (self.nbar * q).exp()
    }
}

/// Closed-form mean and variance of the pixel output.
///
/// Written with `expm1` and in log space so the saturation term stays
/// accurate when `nbar / N_sat^2` is tiny and finite when it is huge.
pub fn saturation_mean_var(spec: &SaturationSpec) -> SaturationMoments {
    let q = (-1.0 / spec.n_sat).exp_m1();
    let mean_k = -spec.k_max * (spec.nbar * q).exp_m1();
    let saturation_term = spec.k_max * spec.k_max * (2.0 * spec.nbar * q + ln_expm1(spec.nbar * q * q)).exp();
    SaturationMoments {
        mean_k,
        var_k: spec.sigma_pix * spec.sigma_pix + saturation_term,
        saturation_term,
    }
}

/// `ln(exp(x) - 1)` for `x >= 0`.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

pub fn sample_saturated_pixel(spec: &SaturationSpec, rng: &mut Stream) -> f64 {
    let n = Counts::new(spec.nbar).draw(rng);
    spec.pixel_response(n) + spec.sigma_pix * gauss(rng)
}

/// Both detector counts pass through the pixel before the ratio is formed.
struct SaturatedRatio {
    spec: SaturationSpec,
    n_t: f64,
}

impl NuSampler for SaturatedRatio {
    fn fill(&self, s: f64, out: &mut [f64], rng: &mut Stream) {
        let s = s.clamp(0.0, 1.0);
        let (c0, c1) = (Counts::new(s * self.n_t), Counts::new((1.0 - s) * self.n_t));
        for v in out.iter_mut() {
            let k0 = self.spec.pixel_response(c0.draw(rng)) + self.spec.sigma_pix * gauss(rng);
            let k1 = self.spec.pixel_response(c1.draw(rng)) + self.spec.sigma_pix * gauss(rng);
            *v = ratio(k0, k0 + k1);
        }
    }
}

impl NoiseModel for SaturationSpec {
    fn name(&self) -> &'static str {
        "saturation"
    }

    /// The estimate of `p` inverts the mean pixel output at `nbar = p n`
    /// photons; both variance parts are propagated through that slope. Deep
    /// in saturation the slope underflows and the readout term goes to
    /// infinity instead of failing.
    fn variance_split(&self, p0: f64, n: u64) -> Result<VarianceSplit> {
        let photons = n.max(1) as f64;
        let nbar = p0 * photons;
        let q = (-1.0 / self.n_sat).exp_m1();
        // slope = k_max |q| N exp(nbar q); the exp factors cancel in the NCLT part.
        let lin = q * photons;
        Ok(VarianceSplit {
            clt: (self.sigma_pix / (self.k_max * lin)).powi(2) * (-2.0 * nbar * q).exp(),
            nclt: (nbar * q * q).exp_m1() / (lin * lin),
        })
    }

    fn nu_sampler(&self, n_t: f64) -> Result<Box<dyn NuSampler>> {
        check_trials(n_t)?;
        Ok(Box::new(SaturatedRatio { spec: *self, n_t }))
    }
}
