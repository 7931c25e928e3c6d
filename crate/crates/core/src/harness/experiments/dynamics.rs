use serde::Deserialize;

use super::{collect, json, svg, Grid};
use crate::dynamics::{self, EpConfig, Protocol};
use crate::error::{Error, Result};
use crate::harness::config::SensorParams;
use crate::harness::output::{Artifact, Table};
use crate::harness::plot::{Plot, Series, Style};
use crate::harness::{RunContext, TypedExperiment};
use crate::noise::correlated::slope;

pub struct ChiVsDelta;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiParams {
    pub sensor: SensorParams,
    pub deltas: Grid,
}

fn sensors(p: &ChiParams) -> Result<Vec<dynamics::SensorConfig>> {
    p.deltas.values()?.into_iter().map(|d| p.sensor.build(Some(d))).collect()
}

impl TypedExperiment for ChiVsDelta {
    const NAME: &'static str = "chi-vs-delta";
    const DESCRIPTION: &'static str = "susceptibility of both protocols across the frame parameter delta";
    type Params = ChiParams;

    fn check(p: &ChiParams) -> Vec<Error> {
        let mut errors = Vec::new();
        match p.deltas.values() {
            Err(e) => errors.push(e),
            Ok(ds) => {
                for d in ds {
                    collect(&mut errors, p.sensor.build(Some(d)).and_then(|s| dynamics::build_h0(&s).map(|_| ())));
                }
            }
        }
        errors
    }

    fn execute(p: &ChiParams, _ctx: &RunContext) -> Result<Vec<Artifact>> {
        let mut table = Table::new("chi_vs_delta", &["delta", "chi_nh", "chi_h"]);
        let (mut nh, mut h) = (Vec::new(), Vec::new());
        for s in sensors(p)? {
            let chi_nh = dynamics::susceptibility(&Protocol::NonHermitian(s))?;
            let chi_h = dynamics::chi_h(s.lambda, s.time);
            table.push(vec![s.delta.re.into(), chi_nh.into(), chi_h.into()]);
            nh.push((s.delta.re, chi_nh));
            h.push((s.delta.re, chi_h));
        }
        let plot = Plot {
            title: "Susceptibility vs delta".into(),
            x_label: "delta".into(),
            y_label: "chi".into(),
            log_x: true,
            log_y: true,
            x_categories: None,
            series: vec![
                Series::new("non-Hermitian", nh, Style::Line),
                Series::new("Hermitian", h, Style::Dashed),
            ],
        };
        Ok(vec![Artifact::Csv(table), svg("chi_vs_delta", plot)])
    }
}

pub struct EpSplitting;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpParams {
    pub gamma: f64,
    /// Couplings to sweep; defaults to the exceptional point `G/2` and `G`.
    #[serde(default)]
    pub couplings: Option<Vec<f64>>,
    pub lambdas: Grid,
    #[serde(default = "default_ep_time")]
    pub time: f64,
}

fn default_ep_time() -> f64 {
    1.0
}

impl EpParams {
    fn couplings(&self) -> Vec<f64> {
        self.couplings.clone().unwrap_or_else(|| vec![0.5 * self.gamma, self.gamma])
    }
}

impl TypedExperiment for EpSplitting {
    const NAME: &'static str = "ep-splitting";
    const DESCRIPTION: &'static str = "eigenvalue splitting of the dissipative qubit at and away from the exceptional point";
    type Params = EpParams;

    fn check(p: &EpParams) -> Vec<Error> {
        let mut errors = Vec::new();
        collect(
            &mut errors,
            EpConfig {
                coupling: 0.0,
                gamma: p.gamma,
                lambda: 0.0,
                time: p.time,
            }
            .validate(),
        );
        match p.lambdas.values() {
            Err(e) => errors.push(e),
            Ok(ls) if ls.iter().any(|&l| !(l > 0.0)) => {
                errors.push(Error::invalid("lambdas", "log-log slopes need positive lambda"))
            }
            Ok(_) => {}
        }
        errors
    }

    fn execute(p: &EpParams, _ctx: &RunContext) -> Result<Vec<Artifact>> {
        let lambdas = p.lambdas.values()?;
        let mut table = Table::new(
            "ep_splitting",
            &["coupling", "lambda", "abs_omega", "response", "p_j", "p_gamma", "residual"],
        );
        let mut slopes = Table::new("ep_slopes", &["coupling", "slope_response", "slope_abs_omega"]);
        let mut series = Vec::new();
        let mut summary = Vec::new();
        for j in p.couplings() {
            let mut resp = Vec::new();
            let mut abs = Vec::new();
            for &l in &lambdas {
                let cfg = EpConfig {
                    coupling: j,
                    gamma: p.gamma,
                    lambda: l,
                    time: p.time,
                };
                let omega = dynamics::ep_splitting(&cfg).norm();
                let response = dynamics::ep_splitting_response(&cfg);
                let obs = dynamics::ep_observables(&cfg)?;
                table.push(vec![
                    j.into(),
                    l.into(),
                    omega.into(),
                    response.into(),
                    obs.p_j.into(),
                    obs.p_gamma.into(),
                    obs.residual.into(),
                ]);
                resp.push((l, response));
                abs.push((l, omega));
            }
            let logs = |pts: &[(f64, f64)]| -> Vec<(f64, f64)> { pts.iter().map(|(x, y)| (x.ln(), y.ln())).collect() };
            let s_resp = slope(&logs(&resp));
            let s_abs = slope(&logs(&abs));
            slopes.push(vec![j.into(), s_resp.into(), s_abs.into()]);
            summary.push(serde_json::json!({ "coupling": j, "slope_response": s_resp, "slope_abs_omega": s_abs }));
            series.push(Series::new(format!("J = {j}"), resp, Style::Line));
        }
        let plot = Plot {
            title: "Splitting response vs signal".into(),
            x_label: "lambda".into(),
            y_label: "|Omega(lambda) - Omega(0)|".into(),
            log_x: true,
            log_y: true,
            x_categories: None,
            series,
        };
        Ok(vec![
            Artifact::Csv(table),
            Artifact::Csv(slopes),
            svg("ep_splitting", plot),
            json("ep_summary", summary),
        ])
    }
}
