//! Exact single-qubit dynamics: the Hermitian baseline, the generic
//! non-Hermitian sensor built from a prescribed eigen-frame, and the
//! dissipative PT-symmetric exceptional-point model.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::diff::{self, StepPolicy};
use crate::error::{Error, Result};
use crate::linalg::{self, c, re, ExpmMethod, Matrix2, State2, C64, I};

/// Which Hermitian operator couples the signal to the qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    #[default]
    SigmaX,
    SigmaZ,
}

impl Probe {
    pub fn matrix(self) -> Matrix2 {
        match self {
            Probe::SigmaX => linalg::sigma_x(),
            Probe::SigmaZ => linalg::sigma_z(),
        }
    }
}

/// Non-Hermitian sensor: eigenvectors `|0> + delta|1>` and `|0> - (delta/a)|1>`
/// with eigenvalues `2 energy` and `0`, perturbed by `lambda * probe`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub a: C64,
    pub delta: C64,
    pub energy: C64,
    pub lambda: f64,
    pub time: f64,
    #[serde(default)]
    pub probe: Probe,
}

impl SensorConfig {
    pub fn new(a: C64, delta: C64, energy: C64, lambda: f64, time: f64) -> Result<Self> {
        let cfg = Self {
            a,
            delta,
            energy,
            lambda,
            time,
            probe: Probe::SigmaX,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Real-parameter sensor evaluated at the quarter period `t = pi / (2 energy)`.
    pub fn at_quarter_period(a: f64, delta: f64, energy: f64, lambda: f64) -> Result<Self> {
        Self::new(re(a), re(delta), re(energy), lambda, FRAC_PI_2 / energy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.norm() <= 1.0 + 1e-12) {
            return Err(Error::invalid("a", format!("|a| = {} exceeds 1", self.a.norm())));
        }
        if !(self.delta.norm() > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite and nonzero"));
        }
        if !self.energy.is_finite() || !self.lambda.is_finite() {
            return Err(Error::invalid("energy", "parameters must be finite"));
        }
        if !(self.time >= 0.0) || !self.time.is_finite() {
            return Err(Error::invalid("time", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_probe(mut self, probe: Probe) -> Self {
        self.probe = probe;
        self
    }

    pub fn with_delta(mut self, delta: C64) -> Self {
        self.delta = delta;
        self
    }
}

/// Unperturbed generator with spectrum `{2 energy, 0}`.
pub fn build_h0(cfg: &SensorConfig) -> Result<Matrix2> {
    let one_plus_a = re(1.0) + cfg.a;
    if one_plus_a.norm() < 1e-12 {
        return Err(Error::DegenerateFrame(one_plus_a.norm()));
    }
    if cfg.delta.norm() == 0.0 {
        return Err(Error::invalid("delta", "must be nonzero"));
    }
    let scale = cfg.energy * 2.0 / one_plus_a;
    Ok(Matrix2::new(re(1.0), cfg.a / cfg.delta, cfg.delta, cfg.a) * scale)
}

/// Full generator `H0 + lambda * probe`.
pub fn hamiltonian(cfg: &SensorConfig) -> Result<Matrix2> {
    Ok(build_h0(cfg)? + cfg.probe.matrix() * re(cfg.lambda))
}

#[derive(Debug, Clone, Copy)]
pub struct Evolution {
    /// Unnormalised `exp(-i H t)|0>`.
    pub state: State2,
    pub method: ExpmMethod,
    pub condition: f64,
}

impl Evolution {
    pub fn norm_sqr(&self) -> f64 {
        self.state.norm_squared()
    }
}

pub fn evolve_nh(cfg: &SensorConfig) -> Result<Evolution> {
    cfg.validate()?;
    let h = hamiltonian(cfg)?;
    let prop = linalg::propagator2(&h, cfg.time);
    Ok(Evolution {
        state: prop.matrix * linalg::ket0(),
        method: prop.method,
        condition: prop.condition,
    })
}

/// Post-selected probability of reading out `|0>`.
pub fn prob_nh(cfg: &SensorConfig) -> Result<f64> {
    let ev = evolve_nh(cfg)?;
    let norm = ev.norm_sqr();
    if !(norm >= 1e-300) {
        return Err(Error::ZeroNorm(norm));
    }
    Ok((ev.state[0].norm_sqr() / norm).clamp(0.0, 1.0))
}

/// `D_t = [(1 - a) + i (1 + a) cot(energy t)] / 2`.
pub fn amplitude_dt(cfg: &SensorConfig) -> C64 {
    let x = cfg.energy * cfg.time;
    let cot = x.cos() / x.sin();
    ((re(1.0) - cfg.a) + I * (re(1.0) + cfg.a) * cot) * 0.5
}

/// Closed-form `lambda = 0` probability `|D|^2 / (|delta|^2 + |D|^2)`.
pub fn prob_nh_unperturbed(cfg: &SensorConfig) -> f64 {
    let d = amplitude_dt(cfg).norm_sqr();
    d / (cfg.delta.norm_sqr() + d)
}

/// Closed-form `lambda = 0` state, written without the cotangent so it stays
/// finite at `energy t = k pi`.
pub fn unperturbed_state(cfg: &SensorConfig) -> State2 {
    let phase = (-I * cfg.energy * (2.0 * cfg.time)).exp();
    let one_plus_a = re(1.0) + cfg.a;
    State2::new((phase + cfg.a) / one_plus_a, cfg.delta * (phase - 1.0) / one_plus_a)
}

/// Hermitian baseline `H = lambda sigma_x`: probability of `|0>`.
pub fn prob_h(lambda: f64, time: f64) -> f64 {
    0.5 * (1.0 + (2.0 * lambda * time).cos())
}

/// `|d p_H / d lambda| = t |sin(2 lambda t)|`.
pub fn chi_h(lambda: f64, time: f64) -> f64 {
    time * (2.0 * lambda * time).sin().abs()
}

/// A sensing protocol: what is evolved and how the signal enters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    Hermitian { lambda: f64, time: f64 },
    NonHermitian(SensorConfig),
}

impl Protocol {
    pub fn lambda(&self) -> f64 {
        match self {
            Protocol::Hermitian { lambda, .. } => *lambda,
            Protocol::NonHermitian(cfg) => cfg.lambda,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        match *self {
            Protocol::Hermitian { time, .. } => Protocol::Hermitian { lambda, time },
            Protocol::NonHermitian(cfg) => Protocol::NonHermitian(cfg.with_lambda(lambda)),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self, Protocol::Hermitian { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Protocol::Hermitian { .. } => "hermitian",
            Protocol::NonHermitian(_) => "non-hermitian",
        }
    }

    /// Probability of `|0>` at the protocol's own lambda.
    pub fn prob(&self) -> Result<f64> {
        match self {
            Protocol::Hermitian { lambda, time } => Ok(prob_h(*lambda, *time)),
            Protocol::NonHermitian(cfg) => prob_nh(cfg),
        }
    }

    pub fn prob_at(&self, lambda: f64) -> Result<f64> {
        self.with_lambda(lambda).prob()
    }

    pub fn susceptibility(&self) -> Result<f64> {
        susceptibility(self)
    }
}

/// `|d p / d lambda|`: analytic for the Hermitian baseline, Richardson central
/// differences of the exactly evolved probability otherwise.
pub fn susceptibility(protocol: &Protocol) -> Result<f64> {
    match protocol {
        Protocol::Hermitian { lambda, time } => Ok(chi_h(*lambda, *time)),
        Protocol::NonHermitian(cfg) => {
            let d = diff::derivative(|l| prob_nh(&cfg.with_lambda(l)), cfg.lambda, StepPolicy::at(cfg.lambda))?;
            Ok(d.abs())
        }
    }
}

/// Amplification ratio `chi_nH / chi_H` at matched `lambda` and `t`.
pub fn amplification(cfg: &SensorConfig) -> Result<f64> {
    let nh = susceptibility(&Protocol::NonHermitian(*cfg))?;
    let h = chi_h(cfg.lambda, cfg.time);
    if h == 0.0 {
        return Err(Error::ZeroSusceptibility);
    }
    Ok(nh / h)
}

/// Dissipative qubit `J sigma_x - i(G/2) sigma_z - i(G/2) I` with signal `lambda sigma_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpConfig {
    pub coupling: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub time: f64,
}

impl EpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::invalid("gamma", "decay rate must be >= 0"));
        }
        if !(self.time >= 0.0) {
            return Err(Error::invalid("time", "must be >= 0"));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Matrix2 {
        let half = re(0.5 * self.gamma);
        linalg::sigma_x() * re(self.coupling) - linalg::sigma_z() * (I * half) - linalg::identity2() * (I * half)
            + linalg::sigma_z() * re(self.lambda)
    }
}

/// Principal `sqrt(J^2 + (lambda - i G/2)^2)`.
pub fn ep_splitting(cfg: &EpConfig) -> C64 {
    let shifted = c(cfg.lambda, -0.5 * cfg.gamma);
    (re(cfg.coupling * cfg.coupling) + shifted * shifted).sqrt()
}

/// Response of the splitting to the signal, `|Omega(lambda) - Omega(0)|`.
/// At the exceptional point `Omega(0) = 0` and this is `|Omega|` itself.
pub fn ep_splitting_response(cfg: &EpConfig) -> f64 {
    let unperturbed = EpConfig { lambda: 0.0, ..*cfg };
    (ep_splitting(cfg) - ep_splitting(&unperturbed)).norm()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpObservables {
    /// `|<up| U |down>|^2`
    pub p_j: f64,
    /// `|<-| U |+>|^2`
    pub p_gamma: f64,
    /// `exp(-G T) |sin(Omega T)|^2`
    pub reference_sum: f64,
    /// `p_j + p_gamma - reference_sum`
    pub residual: f64,
    pub method: ExpmMethod,
}

pub fn ep_observables(cfg: &EpConfig) -> Result<EpObservables> {
    cfg.validate()?;
    let u = linalg::propagator2(&cfg.hamiltonian(), cfg.time);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = State2::new(re(s), re(s));
    let minus = State2::new(re(s), re(-s));
    let p_j = u.matrix[(0, 1)].norm_sqr();
    let p_gamma = (minus.adjoint() * u.matrix * plus)[(0, 0)].norm_sqr();
    let omega = ep_splitting(cfg);
    let reference_sum = (-cfg.gamma * cfg.time).exp() * (omega * cfg.time).sin().norm_sqr();
    Ok(EpObservables {
        p_j,
        p_gamma,
        reference_sum,
        residual: p_j + p_gamma - reference_sum,
        method: u.method,
    })
}
