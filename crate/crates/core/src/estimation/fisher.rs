//! Monte-Carlo classical Fisher information of the ratio observable.
//!
//! `nu` is sampled at `lambda` and `lambda + dlambda`, both ensembles are
//! histogrammed on shared bins, and
//! `F = sum_m [(p_m(lambda + dlambda) - p_m(lambda)) / dlambda]^2 / p_m(lambda)`
//! over bins with `p_m >= floor`. With independent ensembles the sampling
//! variance of each histogram is subtracted from the squared difference,
//! which removes the `~ 2 bins / (M dlambda^2)` upward bias of the plain sum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Protocol, SensorConfig};
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, NoiseSpec};
use crate::rng::{self, label_key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    /// Uniform bins over the pooled range of both ensembles.
    #[default]
    Adaptive,
    /// Uniform bins over `[0, 1]`; samples outside land in the edge bins.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FisherConfig {
    /// Samples of `nu` per histogram.
    pub samples: usize,
    pub bins: usize,
    pub binning: Binning,
    /// Minimum bin probability kept in the sum.
    pub floor: f64,
    pub reps: usize,
    /// Finite-difference step; `None` means `0.1 lambda`.
    pub dlambda: Option<f64>,
    /// Repeat with half the step and compare.
    pub step_check: bool,
    /// Reuse the same random stream at both parameter values.
    pub common_random_numbers: bool,
    /// Subtract the multinomial sampling variance bin by bin. Ignored with
    /// common random numbers, where the two histograms are not independent.
    pub debias: bool,
}

impl Default for FisherConfig {
    fn default() -> Self {
        Self {
            samples: 200_000,
            bins: 64,
            binning: Binning::Adaptive,
            floor: 1e-6,
            reps: 20,
            dlambda: None,
            step_check: false,
            common_random_numbers: false,
            debias: true,
        }
    }
}

impl FisherConfig {
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if self.samples < 2 {
            out.push(Error::invalid("samples", "need at least two samples per histogram"));
        }
        if self.bins < 2 {
            out.push(Error::invalid("bins", "need at least two bins"));
        }
        if self.reps < 2 {
            out.push(Error::invalid("reps", format!("need at least two repetitions, got {}", self.reps)));
        }
        if !(self.floor >= 0.0 && self.floor < 1.0) {
            out.push(Error::invalid("floor", format!("must lie in [0, 1), got {}", self.floor)));
        }
        if let Some(d) = self.dlambda {
            if !(d > 0.0 && d.is_finite()) {
                out.push(Error::invalid("dlambda", format!("must be positive, got {d}")));
            }
        }
        out
    }

    pub fn step(&self, lambda: f64) -> Result<f64> {
        let d = self.dlambda.unwrap_or(0.1 * lambda.abs());
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid("dlambda", format!("default step 0.1 lambda is {d}; set it explicitly")));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCheck {
    pub half_step_value: f64,
    pub half_step_stderr: f64,
    /// Change below two combined standard errors.
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FIEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_bins: usize,
    /// Mean probability mass in bins excluded by the floor.
    pub dropped_mass: f64,
    pub delta_lambda_step: f64,
    pub reps: usize,
    pub unreliable: bool,
    pub step_check: Option<StepCheck>,
}

/// Discrete FI of one pair of ensembles. Returns the FI and the dropped mass.
pub fn histogram_fisher(
    at: &[f64],
    shifted: &[f64],
    bins: usize,
    binning: Binning,
    floor: f64,
    step: f64,
    debias: bool,
) -> Result<(f64, f64)> {
    let first = at.first().copied().ok_or(Error::DegenerateHistogram)?;
    if at.iter().chain(shifted).all(|&v| v == first) {
        return Err(Error::DegenerateHistogram);
    }
    let (lo, hi) = match binning {
        Binning::Unit => (0.0, 1.0),
        Binning::Adaptive => at
            .iter()
            .chain(shifted)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    };
    let width = (hi - lo) / bins as f64;
    let index = |v: f64| (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
    let count = |xs: &[f64]| {
        let mut h = vec![0u64; bins];
        for &v in xs {
            h[index(v)] += 1;
        }
        h
    };
    let (h0, h1) = (count(at), count(shifted));
    let (m0, m1) = (at.len() as f64, shifted.len() as f64);
    let mut fi = 0.0;
    let mut dropped = 0.0;
    let mut kept = 0usize;
    for (&c0, &c1) in h0.iter().zip(&h1) {
        let p0 = c0 as f64 / m0;
        let p1 = c1 as f64 / m1;
        if p0 >= floor && p0 > 0.0 {
            let mut d2 = (p1 - p0).powi(2);
            if debias {
                d2 -= p0 * (1.0 - p0) / (m0 - 1.0).max(1.0) + p1 * (1.0 - p1) / (m1 - 1.0).max(1.0);
            }
            fi += d2 / (step * step * p0);
            kept += 1;
        } else {
            dropped += p0;
        }
    }
    if kept == 0 {
        return Err(Error::AllMassDropped);
    }
    Ok((fi.max(0.0), dropped))
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// One FI estimate per repetition, in repetition order.
fn replicate(
    protocol: &Protocol,
    noise: &dyn NoiseModel,
    n_t: f64,
    cfg: &FisherConfig,
    step: f64,
    seed: u64,
    key: &[u64],
) -> Result<Vec<(f64, f64)>> {
    let s0 = protocol.prob()?;
    let s1 = protocol.prob_at(protocol.lambda() + step)?;
    let sampler = noise.nu_sampler(n_t)?;
    (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let path = |run: u64| {
                let mut p = key.to_vec();
                p.extend([r as u64, run]);
                p
            };
            let mut at = vec![0.0; cfg.samples];
            let mut shifted = vec![0.0; cfg.samples];
            sampler.fill(s0, &mut at, &mut rng::stream(seed, &path(0)));
            let run = if cfg.common_random_numbers { 0 } else { 1 };
            sampler.fill(s1, &mut shifted, &mut rng::stream(seed, &path(run)));
            let debias = cfg.debias && !cfg.common_random_numbers;
            histogram_fisher(&at, &shifted, cfg.bins, cfg.binning, cfg.floor, step, debias)
        })
        .collect()
}

/// Fisher information about `lambda` carried by one `nu` readout built from
/// `n_t` expected detection events.
pub fn mc_fisher(
    protocol: &Protocol,
    noise: &dyn NoiseModel,
    n_t: f64,
    cfg: &FisherConfig,
    seed: u64,
    key: &[u64],
) -> Result<FIEstimate> {
    if let Some(e) = cfg.violations().into_iter().next() {
        return Err(e);
    }
    let step = cfg.step(protocol.lambda())?;
    let reps = replicate(protocol, noise, n_t, cfg, step, seed, key)?;
    let values: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let (value, stderr) = mean_stderr(&values);
    let dropped_mass = reps.iter().map(|r| r.1).sum::<f64>() / reps.len() as f64;

    let step_check = if cfg.step_check {
        let mut half_key = key.to_vec();
        half_key.push(label_key("half-step"));
        let half = replicate(protocol, noise, n_t, cfg, step / 2.0, seed, &half_key)?;
        let (hv, hs) = mean_stderr(&half.iter().map(|r| r.0).collect::<Vec<_>>());
        Some(StepCheck {
            half_step_value: hv,
            half_step_stderr: hs,
            consistent: (hv - value).abs() < 2.0 * (hs * hs + stderr * stderr).sqrt(),
        })
    } else {
        None
    };

    Ok(FIEstimate {
        value,
        stderr,
        n_bins: cfg.bins,
        dropped_mass,
        delta_lambda_step: step,
        reps: cfg.reps,
        unreliable: dropped_mass >= 0.01,
        step_check,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiRow {
    pub noise: String,
    pub hermitian: FIEstimate,
    /// Same `N_t` for both protocols.
    pub non_hermitian: FIEstimate,
    /// `N_t P_s` detection events for the post-selected protocol.
    pub non_hermitian_scaled: FIEstimate,
    pub success_prob: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// `(F_nH - F_H)` in units of the combined standard error.
    pub separation: f64,
    pub ratio_scaled: f64,
    pub ratio_scaled_stderr: f64,
}

fn ratio_with_error(num: &FIEstimate, den: &FIEstimate) -> (f64, f64) {
    let r = num.value / den.value;
    let rel = ((num.stderr / num.value).powi(2) + (den.stderr / den.value).powi(2)).sqrt();
    (r, r.abs() * rel)
}

/// FI of both protocols under each noise model, with common seeds per model.
pub fn fi_compare(suite: &[NoiseSpec], sensor: &SensorConfig, n_t: f64, cfg: &FisherConfig, seed: u64) -> Result<Vec<FiRow>> {
    let herm = Protocol::Hermitian {
        lambda: sensor.lambda,
        time: sensor.time,
    };
    let nh = Protocol::NonHermitian(*sensor);
    let success_prob = crate::dilation::evolve_dilated(&crate::dilation::DilationConfig::new(*sensor))?.success_prob;

    suite
        .iter()
        .map(|spec| {
            let noise = spec.build()?;
            let key = [label_key(spec.name())];
            let hermitian = mc_fisher(&herm, noise.as_ref(), n_t, cfg, seed, &key)?;
            let non_hermitian = mc_fisher(&nh, noise.as_ref(), n_t, cfg, seed, &key)?;
            let scaled_key = [label_key(spec.name()), label_key("post-selection")];
            let non_hermitian_scaled = mc_fisher(&nh, noise.as_ref(), n_t * success_prob, cfg, seed, &scaled_key)?;
            let (ratio, ratio_stderr) = ratio_with_error(&non_hermitian, &hermitian);
            let (ratio_scaled, ratio_scaled_stderr) = ratio_with_error(&non_hermitian_scaled, &hermitian);
            let combined = (non_hermitian.stderr.powi(2) + hermitian.stderr.powi(2)).sqrt();
            Ok(FiRow {
                noise: spec.name().to_string(),
                hermitian,
                non_hermitian,
                non_hermitian_scaled,
                success_prob,
                ratio,
                ratio_stderr,
                separation: (non_hermitian.value - hermitian.value) / combined,
                ratio_scaled,
                ratio_scaled_stderr,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Noiseless;
    use std::f64::consts::PI;

    #[test]
    fn constant_observable_is_degenerate() {
        let v = vec![0.5; 100];
        assert_eq!(histogram_fisher(&v, &v, 8, Binning::Adaptive, 1e-6, 0.1, false), Err(Error::DegenerateHistogram));
        assert_eq!(histogram_fisher(&v, &v, 8, Binning::Unit, 1e-6, 0.1, false), Err(Error::DegenerateHistogram));
    }

    #[test]
    fn floor_above_every_bin_drops_everything() {
        let a: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        assert_eq!(histogram_fisher(&a, &a, 10, Binning::Adaptive, 0.5, 0.1, false), Err(Error::AllMassDropped));
    }

    #[test]
    fn identical_ensembles_carry_no_information() {
        let a: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).fract()).collect();
        let (fi, dropped) = histogram_fisher(&a, &a, 16, Binning::Adaptive, 1e-6, 0.01, false).unwrap();
        assert_eq!(fi, 0.0);
        assert_eq!(dropped, 0.0);
    }

    #[test]
    fn shifted_uniform_matches_hand_count() {
        // Two bins; moving one sample of four across the boundary.
        let at = [0.1, 0.2, 0.7, 0.8];
        let shifted = [0.1, 0.6, 0.7, 0.8];
        let (fi, _) = histogram_fisher(&at, &shifted, 2, Binning::Unit, 0.0, 0.5, false).unwrap();
        // p = (1/2, 1/2) -> (1/4, 3/4); dp = (-1/2, 1/2) per unit lambda.
        assert!((fi - (0.25 / 0.5 + 0.25 / 0.5)).abs() < 1e-15);
    }

    #[test]
    fn debiasing_removes_sampling_noise() {
        // Same distribution at both points: the true FI is zero.
        use rand::Rng;
        let draw = |seed: u64| -> Vec<f64> {
            let mut r = rng::stream(seed, &[]);
            (0..20_000).map(|_| r.random::<f64>()).collect()
        };
        let (mut plain, mut fixed) = (0.0, 0.0);
        for k in 0..20 {
            let (a, b) = (draw(2 * k), draw(2 * k + 1));
            plain += histogram_fisher(&a, &b, 32, Binning::Unit, 0.0, 1.0, false).unwrap().0 / 20.0;
            fixed += histogram_fisher(&a, &b, 32, Binning::Unit, 0.0, 1.0, true).unwrap().0 / 20.0;
        }
        // Plain sum carries about 2 bins / M.
        assert!((plain - 2.0 * 32.0 / 20_000.0).abs() < 1e-3);
        assert!(fixed < 3e-4);
    }

    #[test]
    fn rejects_single_repetition() {
        let h = Protocol::Hermitian { lambda: 0.01, time: PI };
        let cfg = FisherConfig {
            reps: 1,
            ..FisherConfig::default()
        };
        assert!(mc_fisher(&h, &Noiseless, 10.0, &cfg, 0, &[]).is_err());
    }
}
