//! Power-law correlated background noise on a continuous readout signal.
//!
//! Each shot records `X_j = x_j + xi_j`, where `x_j` is drawn from the
//! two-state Gaussian mixture and `xi` is a stationary Gaussian background
//! with covariance `C(0) = sigma_xi^2`, `C(d) = c d^-gamma` for `d >= 1`.
//! A zero `sigma_xi` switches the background off altogether.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_trials, gauss, ratio, Counts, NoiseModel, NuSampler, VarianceSplit};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Largest shot count sampled through an explicit covariance factor.
pub const MAX_FACTORIZED_SHOTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatedNoiseSpec {
    /// Decay exponent of the lag covariance.
    #[serde(alias = "gamma")]
    pub gamma_exp: f64,
    pub c: f64,
    pub sigma_xi: f64,
    /// Signal separation `x0 - x1` of the two readout states.
    #[serde(default = "unit_contrast")]
    pub contrast: f64,
    #[serde(default)]
    pub x1: f64,
    #[serde(default)]
    pub sigma_shot: f64,
}

fn unit_contrast() -> f64 {
    1.0
}

impl CorrelatedNoiseSpec {
    pub fn new(gamma_exp: f64, c: f64, sigma_xi: f64, contrast: f64) -> Self {
        Self {
            gamma_exp,
            c,
            sigma_xi,
            contrast,
            x1: 0.0,
            sigma_shot: 0.0,
        }
    }

    /// Background with `S_N ~ N^beta`, i.e. `gamma = 2 - beta`. At `beta = 2`
    /// every lag carries the constant covariance `c`.
    pub fn from_beta(beta: f64, c: f64, sigma_xi: f64, contrast: f64) -> Self {
        Self::new(2.0 - beta, c, sigma_xi, contrast)
    }

    /// Every shot sees the same background: `C_ij = sigma_xi^2`.
    pub fn perfectly_correlated(sigma_xi: f64, contrast: f64) -> Self {
        Self::new(0.0, sigma_xi * sigma_xi, sigma_xi, contrast)
    }

    pub fn with_shot_noise(mut self, sigma_shot: f64) -> Self {
        self.sigma_shot = sigma_shot;
        self
    }

    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if !(self.gamma_exp > 0.0 && self.gamma_exp.is_finite()) {
            out.push(Error::invalid("gamma", format!("decay exponent must be positive, got {}", self.gamma_exp)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            out.push(Error::invalid("c", format!("amplitude must be positive, got {}", self.c)));
        }
        if !(self.sigma_xi >= 0.0 && self.sigma_xi.is_finite()) {
            out.push(Error::invalid("sigma_xi", format!("must be non-negative, got {}", self.sigma_xi)));
        }
        if !(self.contrast > 0.0 && self.contrast.is_finite()) {
            out.push(Error::invalid("contrast", format!("must be positive, got {}", self.contrast)));
        }
        if !(self.sigma_shot >= 0.0 && self.sigma_shot.is_finite()) {
            out.push(Error::invalid("sigma_shot", format!("must be non-negative, got {}", self.sigma_shot)));
        }
        if !self.x1.is_finite() {
            out.push(Error::invalid("x1", "must be finite"));
        }
        out
    }

    fn background_on(&self) -> bool {
        self.sigma_xi > 0.0
    }

    /// Background covariance at lag `d`.
    pub fn lag_covariance(&self, d: usize) -> f64 {
        if !self.background_on() {
            0.0
        } else if d == 0 {
            self.sigma_xi * self.sigma_xi
        } else {
            self.c * (d as f64).powf(-self.gamma_exp)
        }
    }

    /// `S_n = sum_ij C(|i - j|) = n C(0) + 2 sum_d (n - d) C(d)`.
    pub fn correlated_sum(&self, n: usize) -> f64 {
        let tail: f64 = (1..n).map(|d| (n - d) as f64 * self.lag_covariance(d)).sum();
        n as f64 * self.lag_covariance(0) + 2.0 * tail
    }

    /// Variance of `p_hat = sum_j (X_j - x1) / (n x)`.
    pub fn estimator_variance(&self, p0: f64, n: usize) -> VarianceSplit {
        let n = n.max(1);
        let (nf, x2) = (n as f64, self.contrast * self.contrast);
        VarianceSplit {
            clt: p0 * (1.0 - p0) / nf + self.sigma_shot * self.sigma_shot / (nf * x2),
            nclt: self.correlated_sum(n) / (nf * nf * x2),
        }
    }

    /// Least-squares slope of `log S_N` against `log N`.
    pub fn fit_beta(&self, n_grid: &[usize]) -> Result<f64> {
        if n_grid.len() < 4 {
            return Err(Error::InsufficientGrid(format!("need at least 4 points, got {}", n_grid.len())));
        }
        let lo = *n_grid.iter().min().unwrap();
        let hi = *n_grid.iter().max().unwrap();
        if lo == 0 || (hi as f64) < 100.0 * lo as f64 {
            return Err(Error::InsufficientGrid(format!("grid {lo}..{hi} spans less than two decades")));
        }
        if !self.background_on() {
            return Err(Error::invalid("sigma_xi", "no background to fit"));
        }
        let pts: Vec<(f64, f64)> = n_grid
            .iter()
            .map(|&n| ((n as f64).ln(), self.correlated_sum(n).ln()))
            .collect();
        Ok(slope(&pts))
    }
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Exact sampler of `n` correlated shots via a Cholesky factor of the
/// Toeplitz covariance.
#[derive(Debug, Clone)]
pub struct CorrelatedSampler {
    spec: CorrelatedNoiseSpec,
    factor: Option<DMatrix<f64>>,
    n: usize,
}

impl CorrelatedSampler {
    pub fn new(spec: &CorrelatedNoiseSpec, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_FACTORIZED_SHOTS {
            return Err(Error::invalid(
                "n",
                format!("exact sampling supports 1..={MAX_FACTORIZED_SHOTS} shots, got {n}"),
            ));
        }
        let factor = if spec.background_on() {
            let c0 = spec.lag_covariance(0);
            let cov = DMatrix::from_fn(n, n, |i, j| spec.lag_covariance(i.abs_diff(j)));
            let factor = [0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10].iter().find_map(|&j| {
                let mut m = cov.clone();
                for k in 0..n {
                    m[(k, k)] += j * c0;
                }
                m.cholesky().map(|ch| ch.l())
            });
            Some(factor.ok_or(Error::NotPositiveSemidefinite(n))?)
        } else {
            None
        };
        Ok(Self { spec: *spec, factor, n })
    }

    pub fn sample_shots(&self, p0: f64, rng: &mut Stream) -> Vec<f64> {
        let s = &self.spec;
        let mut shots: Vec<f64> = (0..self.n)
            .map(|_| {
                let level = if rng.random::<f64>() < p0 { s.x1 + s.contrast } else { s.x1 };
                level + s.sigma_shot * gauss(rng)
            })
            .collect();
        if let Some(l) = &self.factor {
            let z = DVector::from_fn(self.n, |_, _| gauss(rng));
            let xi = l * z;
            for (x, e) in shots.iter_mut().zip(xi.iter()) {
                *x += e;
            }
        }
        shots
    }

    /// `p_hat = sum_j (X_j - x1) / (n x)`.
    pub fn estimate(&self, shots: &[f64]) -> f64 {
        shots.iter().map(|x| x - self.spec.x1).sum::<f64>() / (shots.len() as f64 * self.spec.contrast)
    }
}

pub fn sample_correlated_shots(spec: &CorrelatedNoiseSpec, p0: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = CorrelatedSampler::new(spec, n)?;
    Ok(sampler.sample_shots(p0, &mut rng::stream(seed, &[])))
}

/// Counts 0 and 1 both pick up a Gaussian background with the variance of the
/// integrated signal over `n` shots, correlated at lag one.
struct CorrelatedRatio {
    n_t: f64,
    sd: f64,
    rho: f64,
}

impl NuSampler for CorrelatedRatio {
    fn fill(&self, s: f64, out: &mut [f64], rng: &mut Stream) {
        let s = s.clamp(0.0, 1.0);
        let (c0, c1) = (Counts::new(s * self.n_t), Counts::new((1.0 - s) * self.n_t));
        let perp = (1.0 - self.rho * self.rho).sqrt();
        for v in out.iter_mut() {
            let n0 = c0.draw(rng);
            let n1 = c1.draw(rng);
            let g0 = gauss(rng);
            let g1 = gauss(rng);
            let xi0 = self.sd * g0;
            let xi1 = self.sd * (self.rho * g0 + perp * g1);
            *v = ratio(n0 + xi0, n0 + n1 + xi0 + xi1);
        }
    }
}

impl NoiseModel for CorrelatedNoiseSpec {
    fn name(&self) -> &'static str {
        "correlated"
    }

    fn variance_split(&self, p0: f64, n: u64) -> Result<VarianceSplit> {
        Ok(self.estimator_variance(p0, n as usize))
    }

    fn nu_sampler(&self, n_t: f64) -> Result<Box<dyn NuSampler>> {
        check_trials(n_t)?;
        let n = (n_t.round() as usize).max(1);
        let c0 = self.lag_covariance(0);
        let rho = if c0 > 0.0 { (self.lag_covariance(1) / c0).clamp(-1.0, 1.0) } else { 0.0 };
        Ok(Box::new(CorrelatedRatio {
            n_t,
            sd: (self.correlated_sum(n) / (self.contrast * self.contrast)).sqrt(),
            rho,
        }))
    }
}
