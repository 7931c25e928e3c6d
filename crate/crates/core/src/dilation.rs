//! Hermitian dilation of the non-Hermitian sensor and quantum Fisher
//! information with and without the post-selection cost.
//!
//! The system qubit is embedded with one ancilla. With a positive metric `M`
//! satisfying `H^dag M = M H` and `U = sqrt(M - I)`, the operators
//!
//! ```text
//! Gamma  = i (H U - U H) M^-1
//! Lambda = (H + U H U) M^-1
//! H_tot  = Lambda (x) I + Gamma (x) sigma_z
//! ```
//!
//! generate `|Psi(t)> = |psi(t)> (x) |keep> - i U |psi(t)> (x) |flip>` where
//! `|psi(t)>` is the non-Hermitian evolution and `sigma_z` swaps the two
//! ancilla states `|keep> = (|0> - i|1>)/sqrt 2` and `|flip> = (|0> + i|1>)/sqrt 2`.
//! Post-selecting the ancilla on `|keep>` recovers `|psi(t)>`.
//!
//! For a real sensor the diagonal metric is `diag[1, h01/h10]` of the full
//! generator. With a `sigma_z` probe, or at `lambda = 0`, this is exactly
//! `diag[1, a/delta^2]`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::diff::{self, StepPolicy};
use crate::dynamics::{self, SensorConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, re, Matrix2, Matrix4, State2, State4, C64, I};

const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationConfig {
    pub sensor: SensorConfig,
}

impl DilationConfig {
    pub fn new(sensor: SensorConfig) -> Self {
        Self { sensor }
    }

    /// Second diagonal entry of the metric, `h01 / h10`.
    pub fn metric_weight(&self) -> Result<f64> {
        let h = dynamics::hamiltonian(&self.sensor)?;
        let scale = linalg::max_abs(&h).max(1e-300);
        if h.iter().any(|z| z.im.abs() > 1e-12 * scale) {
            return Err(Error::MetricViolation(
                "static diagonal metric requires real a, delta and energy".into(),
            ));
        }
        let (upper, lower) = (h[(0, 1)].re, h[(1, 0)].re);
        if lower == 0.0 {
            return Err(Error::MetricViolation("lower off-diagonal of H vanishes".into()));
        }
        let m = upper / lower;
        if !(m >= 1.0 - 1e-12) {
            return Err(Error::MetricViolation(format!(
                "M - I has negative eigenvalue {:.6e} (need a/delta^2 >= 1)",
                m - 1.0
            )));
        }
        Ok(m.max(1.0))
    }

    pub fn metric_ok(&self) -> bool {
        self.metric_weight().is_ok()
    }

    pub fn metric(&self) -> Result<Matrix2> {
        let m = self.metric_weight()?;
        Ok(Matrix2::from_diagonal(&State2::new(re(1.0), re(m))))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dilation {
    pub metric: Matrix2,
    pub root: Matrix2,
    pub gamma_op: Matrix2,
    pub lambda_op: Matrix2,
    pub h_tot: Matrix4,
}

pub(crate) fn kron(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

pub fn build_dilation(cfg: &DilationConfig) -> Result<Dilation> {
    let h = dynamics::hamiltonian(&cfg.sensor)?;
    let m = cfg.metric_weight()?;
    let metric = Matrix2::from_diagonal(&State2::new(re(1.0), re(m)));
    let root = Matrix2::from_diagonal(&State2::new(re(0.0), re((m - 1.0).sqrt())));
    let metric_inv = Matrix2::from_diagonal(&State2::new(re(1.0), re(1.0 / m)));

    let gamma_op = (h * root - root * h) * I * metric_inv;
    let lambda_op = (h + root * h * root) * metric_inv;
    let h_tot = kron(&lambda_op, &linalg::identity2()) + kron(&gamma_op, &linalg::sigma_z());

    let defect = linalg::hermiticity_defect(&h_tot);
    if defect > HERMITICITY_TOL * linalg::max_abs(&h_tot).max(1.0) {
        return Err(Error::DilationNotHermitian(defect));
    }
    Ok(Dilation {
        metric,
        root,
        gamma_op,
        lambda_op,
        h_tot,
    })
}

/// Ancilla state the system is post-selected on.
pub fn ancilla_keep() -> State2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    State2::new(re(s), -I * s)
}

/// `[1/sqrt 2, -i/sqrt 2, 0, 0]`: system `|0>` with the ancilla in `|keep>`.
pub fn initial_state() -> State4 {
    let keep = ancilla_keep();
    State4::new(keep[0], keep[1], re(0.0), re(0.0))
}

/// Contract the ancilla with `<anc|`.
pub fn project_ancilla(full: &State4, anc: &State2) -> State2 {
    State2::new(
        anc[0].conj() * full[0] + anc[1].conj() * full[1],
        anc[0].conj() * full[2] + anc[1].conj() * full[3],
    )
}

#[derive(Debug, Clone, Copy)]
pub struct DilatedEvolution {
    pub full: State4,
    /// Unnormalised system state after the ancilla is found in `|keep>`.
    pub post_state: State2,
    pub success_prob: f64,
}

pub fn evolve_dilated(cfg: &DilationConfig) -> Result<DilatedEvolution> {
    let dil = build_dilation(cfg)?;
    let u = linalg::hermitian_propagator(&dil.h_tot, cfg.sensor.time);
    let full = u * initial_state();
    let post_state = project_ancilla(&full, &ancilla_keep());
    Ok(DilatedEvolution {
        full,
        post_state,
        success_prob: post_state.norm_squared().clamp(0.0, 1.0),
    })
}

/// Pure-state QFI `4(<d psi|d psi> - |<d psi|psi>|^2)` of the normalised
/// family `psi(lambda)`.
pub fn pure_state_qfi<F>(mut psi: F, lambda: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<DVector<C64>>,
{
    let mut normalized = |l: f64| -> Result<DVector<C64>> {
        let v = psi(l)?;
        let n = v.norm();
        if !(n > 1e-150) {
            return Err(Error::ZeroNorm(n * n));
        }
        Ok(v / re(n))
    };
    let d = diff::derivative(&mut normalized, lambda, StepPolicy::at(lambda))?;
    let v = normalized(lambda)?;
    let overlap = d.dotc(&v);
    Ok((4.0 * (d.norm_squared() - overlap.norm_sqr())).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiResult {
    pub delta: f64,
    /// QFI of the normalised post-selected state.
    pub naive_qfi: f64,
    pub success_prob: f64,
    pub weighted_qfi: f64,
    /// QFI of the full system-plus-ancilla state.
    pub dilated_qfi: f64,
}

pub fn qfi_point(sensor: &SensorConfig) -> Result<QfiResult> {
    let base = DilationConfig::new(*sensor);
    let at = |l: f64| DilationConfig::new(sensor.with_lambda(l));
    let evo = evolve_dilated(&base)?;

    let naive_qfi = pure_state_qfi(
        |l| Ok(DVector::from_column_slice(evolve_dilated(&at(l))?.post_state.as_slice())),
        sensor.lambda,
    )?;
    let dilated_qfi = pure_state_qfi(
        |l| Ok(DVector::from_column_slice(evolve_dilated(&at(l))?.full.as_slice())),
        sensor.lambda,
    )?;
    Ok(QfiResult {
        delta: sensor.delta.re,
        naive_qfi,
        success_prob: evo.success_prob,
        weighted_qfi: evo.success_prob * naive_qfi,
        dilated_qfi,
    })
}

/// QFI accounting across a sweep of `delta`, in input order.
pub fn qfi_scan(base: &SensorConfig, deltas: &[f64]) -> Result<Vec<QfiResult>> {
    deltas
        .par_iter()
        .map(|&d| qfi_point(&base.with_delta(re(d))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Probe;
    use crate::linalg::max_abs;
    use std::f64::consts::PI;

    fn sensor(a: f64, delta: f64, energy: f64, lambda: f64, time: f64) -> SensorConfig {
        SensorConfig::new(re(a), re(delta), re(energy), lambda, time).unwrap()
    }

    #[test]
    fn trivial_metric_gives_zero_root() {
        let d = build_dilation(&DilationConfig::new(sensor(1.0, 1.0, 0.5, 0.0, PI))).unwrap();
        assert!(max_abs(&(d.metric - Matrix2::identity())) < 1e-15);
        assert!(max_abs(&d.root) < 1e-15);
        assert!(max_abs(&d.gamma_op) < 1e-15);
    }

    #[test]
    fn diagonal_metric_and_root() {
        let d = build_dilation(&DilationConfig::new(sensor(1.0, 0.3, 0.5, 0.0, PI))).unwrap();
        assert!((d.metric[(1, 1)].re - 1.0 / 0.09).abs() < 1e-12);
        assert!((d.root[(1, 1)].re - (1.0 / 0.09 - 1.0f64).sqrt()).abs() < 1e-12);
        assert_eq!(d.root[(0, 0)], re(0.0));
    }

    #[test]
    fn sigma_z_probe_keeps_literal_metric() {
        let s = sensor(1.0, 0.3, 0.5, 0.01, PI).with_probe(Probe::SigmaZ);
        let m = DilationConfig::new(s).metric_weight().unwrap();
        assert!((m - 1.0 / 0.09).abs() < 1e-10);
    }

    #[test]
    fn full_dilation_is_hermitian() {
        for probe in [Probe::SigmaX, Probe::SigmaZ] {
            let s = sensor(1.0, 0.3, 0.5, 0.01, PI).with_probe(probe);
            let d = build_dilation(&DilationConfig::new(s)).unwrap();
            assert!(linalg::hermiticity_defect(&d.h_tot) < 1e-12);
        }
    }

    #[test]
    fn metric_violation_when_delta_too_large() {
        let err = build_dilation(&DilationConfig::new(sensor(1.0, 1.5, 0.5, 0.0, PI))).unwrap_err();
        assert!(matches!(err, Error::MetricViolation(_)));
        let complex = SensorConfig::new(re(1.0), linalg::c(0.3, 0.1), re(0.5), 0.0, PI).unwrap();
        assert!(!DilationConfig::new(complex).metric_ok());
    }

    #[test]
    fn complex_energy_is_not_dilatable() {
        let s = SensorConfig::new(re(1.0), re(0.3), linalg::c(0.5, 0.1), 0.0, PI).unwrap();
        assert!(build_dilation(&DilationConfig::new(s)).is_err());
    }

    #[test]
    fn success_prob_at_time_zero() {
        let evo = evolve_dilated(&DilationConfig::new(sensor(1.0, 0.3, 0.5, 0.01, 0.0))).unwrap();
        let expected = project_ancilla(&initial_state(), &ancilla_keep()).norm_squared();
        assert!((evo.success_prob - expected).abs() < 1e-15);
        assert!((evo.success_prob - 1.0).abs() < 1e-15);
    }

    #[test]
    fn post_selected_state_realizes_nh_dynamics() {
        let s = sensor(1.0, 0.3, 0.5, 0.01, PI);
        let evo = evolve_dilated(&DilationConfig::new(s)).unwrap();
        let target = dynamics::evolve_nh(&s).unwrap().state;
        assert!((evo.full.norm() - 1.0).abs() < 1e-12);
        let cos = evo.post_state.dotc(&target).norm() / (evo.post_state.norm() * target.norm());
        assert!(1.0 - cos < 1e-12);
        // Norm is carried over exactly: P_s = ||psi(t)||^2 since psi(0)^dag M psi(0) = 1.
        assert!((evo.success_prob - target.norm_squared()).abs() < 1e-10);
    }

    #[test]
    fn phase_estimation_state_qfi() {
        let t = 1.7;
        let f = pure_state_qfi(
            |l| {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Ok(DVector::from_vec(vec![(-I * l * t).exp() * s, (I * l * t).exp() * s]))
            },
            0.3,
        )
        .unwrap();
        assert!((f - 4.0 * t * t).abs() < 1e-7);
    }

    #[test]
    fn constant_state_has_zero_qfi() {
        let f = pure_state_qfi(|_| Ok(DVector::from_vec(vec![re(0.6), linalg::c(0.0, 0.8)])), 0.1).unwrap();
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn trivial_dilation_weighted_equals_naive() {
        let r = qfi_point(&sensor(1.0, 1.0, 0.5, 0.01, PI)).unwrap();
        assert!((r.success_prob - 1.0).abs() < 1e-12);
        assert!((r.weighted_qfi - r.naive_qfi).abs() < 1e-9 * r.naive_qfi);
    }
}
