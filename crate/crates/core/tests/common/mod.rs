//! Independent oracles. Nothing here calls into the library's numerics.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M2 = [[C; 2]; 2];

pub fn mat2_mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn norm1(a: &M2) -> f64 {
    (0..2).map(|j| a[0][j].norm() + a[1][j].norm()).fold(0.0, f64::max)
}

/// Scaling and squaring with a 30-term Taylor series.
pub fn expm_oracle(a: &M2) -> M2 {
    let n = norm1(a);
    let s = if n > 0.25 { (n / 0.25).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let x = [[a[0][0] * scale, a[0][1] * scale], [a[1][0] * scale, a[1][1] * scale]];
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let mut sum = [[one, zero], [zero, one]];
    let mut term = sum;
    for k in 1..=30 {
        term = mat2_mul(&term, &x);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = mat2_mul(&sum, &sum);
    }
    sum
}

/// `exp(-i H t)` applied to `|0>`.
pub fn evolve_oracle(h: &M2, t: f64) -> [C; 2] {
    let mi = C::new(0.0, -t);
    let a = [[h[0][0] * mi, h[0][1] * mi], [h[1][0] * mi, h[1][1] * mi]];
    let u = expm_oracle(&a);
    [u[0][0], u[1][0]]
}

/// Eigenvalues of a 2x2 matrix from its characteristic polynomial.
pub fn eigenvalues2(h: &M2) -> (C, C) {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (tr * tr * 0.25 - det).sqrt();
    (tr * 0.5 + disc, tr * 0.5 - disc)
}

/// Closed-form lambda = 0 readout, written from `2 D_t = (1 - a) + i (1 + a) cot(E t)`.
pub fn prob_closed_form(a: C, delta: C, energy: C, t: f64) -> f64 {
    let x = energy * t;
    let cot = x.cos() / x.sin();
    let d = ((C::new(1.0, 0.0) - a) + C::new(0.0, 1.0) * (C::new(1.0, 0.0) + a) * cot) * 0.5;
    d.norm_sqr() / (delta.norm_sqr() + d.norm_sqr())
}

/// `sum_{i,j < n} C(|i - j|)` by brute force.
pub fn correlated_sum_oracle(n: usize, c0: f64, c: f64, gamma: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = i.abs_diff(j);
            total += if d == 0 { c0 } else { c * (d as f64).powf(-gamma) };
        }
    }
    total
}

/// Poisson pmf evaluated through logs, over `0..=kmax`.
pub fn poisson_pmf(mean: f64, kmax: usize) -> Vec<f64> {
    if mean == 0.0 {
        let mut v = vec![0.0; kmax + 1];
        v[0] = 1.0;
        return v;
    }
    let mut out = Vec::with_capacity(kmax + 1);
    let mut log_fact = 0.0;
    for k in 0..=kmax {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        out.push((k as f64 * mean.ln() - mean - log_fact).exp());
    }
    out
}

/// Poisson support truncated at `nbar + 10 sqrt(nbar) + 20`.
pub fn truncation(nbar: f64) -> usize {
    (nbar + 10.0 * nbar.sqrt() + 20.0).ceil() as usize
}

/// Mean and variance of `k = k_max (1 - exp(-N / N_sat)) + sigma g` with
/// `N ~ Poisson(nbar)`, summed term by term with compensated summation.
pub fn saturation_oracle(k_max: f64, n_sat: f64, sigma: f64, nbar: f64) -> (f64, f64) {
    let pmf = poisson_pmf(nbar, truncation(nbar));
    let resp = |n: usize| -k_max * (-(n as f64) / n_sat).exp_m1();
    let mean = kahan(pmf.iter().enumerate().map(|(n, p)| p * resp(n)));
    let second = kahan(pmf.iter().enumerate().map(|(n, p)| p * (resp(n) - mean).powi(2)));
    (mean, sigma * sigma + second)
}

pub fn kahan(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn poisson_fd(m0: f64, m1: f64, step: f64) -> f64 {
    let kmax = truncation(m0.max(m1));
    let p0 = poisson_pmf(m0, kmax);
    let p1 = poisson_pmf(m1, kmax);
    kahan(
        p0.iter()
            .zip(&p1)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| ((b - a) / step).powi(2) / a),
    )
}

/// Forward-difference FI of the noiseless count pair `n0 ~ Poisson(N_t S)`,
/// `n1 ~ Poisson(N_t (1 - S))`. The total is ancillary, so this is also the
/// information in the ratio readout up to the loss from binning.
pub fn count_pair_fd_fisher(n_t: f64, s0: f64, s1: f64, step: f64) -> f64 {
    poisson_fd(n_t * s0, n_t * s1, step) + poisson_fd(n_t * (1.0 - s0), n_t * (1.0 - s1), step)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
