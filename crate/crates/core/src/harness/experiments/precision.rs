use serde::Deserialize;

use super::{collect, json, svg, Grid};
use crate::dilation::DilationConfig;
use crate::dynamics::SensorConfig;
use crate::error::{Error, Result};
use crate::estimation::{self, Accounting, Background, Comparison};
use crate::harness::config::SensorParams;
use crate::harness::output::{Artifact, Cell, Table};
use crate::harness::plot::{Plot, Series, Style};
use crate::harness::{RunContext, TypedExperiment};
use crate::noise::NoiseSpec;

const COMPARISON_COLUMNS: [&str; 9] = [
    "delta_lambda_h",
    "delta_lambda_nh",
    "ratio",
    "sigma_clt_h",
    "sigma_nclt_h",
    "sigma_clt_nh",
    "sigma_nclt_nh",
    "n_effective_nh",
    "success_prob",
];

fn comparison_cells(c: &Comparison) -> Vec<Cell> {
    vec![
        c.hermitian.delta_lambda.into(),
        c.non_hermitian.delta_lambda.into(),
        c.ratio.into(),
        c.hermitian.sigma_clt.into(),
        c.hermitian.sigma_nclt.into(),
        c.non_hermitian.sigma_clt.into(),
        c.non_hermitian.sigma_nclt.into(),
        c.non_hermitian.n_effective.into(),
        c.non_hermitian.success_prob.into(),
    ]
}

fn headers(lead: &[&'static str]) -> Vec<&'static str> {
    lead.iter().copied().chain(COMPARISON_COLUMNS).collect()
}

/// Post-selection accounting needs a valid dilation.
fn check_sensor(sensor: &SensorConfig, accounting: Accounting) -> Result<()> {
    crate::dynamics::build_h0(sensor)?;
    if accounting == Accounting::PostSelection {
        DilationConfig::new(*sensor).metric_weight()?;
    }
    Ok(())
}

fn check_background(b: &Background) -> Vec<Error> {
    let mut out = Vec::new();
    if !(b.c > 0.0 && b.c.is_finite()) {
        out.push(Error::invalid("c", format!("amplitude must be positive, got {}", b.c)));
    }
    if !(b.sigma_xi >= 0.0 && b.sigma_xi.is_finite()) {
        out.push(Error::invalid("sigma_xi", format!("must be non-negative, got {}", b.sigma_xi)));
    }
    if !(b.contrast > 0.0) {
        out.push(Error::invalid("contrast", format!("must be positive, got {}", b.contrast)));
    }
    if !(b.sigma_shot >= 0.0) {
        out.push(Error::invalid("sigma_shot", format!("must be non-negative, got {}", b.sigma_shot)));
    }
    out
}

pub struct PrecisionVsBeta;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvantageParams {
    pub beta: f64,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionBetaParams {
    pub sensor: SensorParams,
    pub background: Background,
    pub betas: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: u64,
    #[serde(default)]
    pub accounting: Accounting,
    #[serde(default)]
    pub advantage: Option<AdvantageParams>,
}

fn default_n() -> u64 {
    1000
}

fn check_beta(beta: f64) -> Result<()> {
    // beta = 1 is the uncorrelated edge, beta = 2 the fully correlated one.
    if (1.0..=2.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::invalid("beta", format!("must lie in [1, 2], got {beta}")))
    }
}

impl TypedExperiment for PrecisionVsBeta {
    const NAME: &'static str = "precision-vs-beta";
    const DESCRIPTION: &'static str = "precision of both protocols at fixed N across the correlation exponent beta";
    type Params = PrecisionBetaParams;

    fn check(p: &PrecisionBetaParams) -> Vec<Error> {
        let mut errors = check_background(&p.background);
        if p.betas.is_empty() {
            errors.push(Error::invalid("betas", "is empty"));
        }
        for &b in &p.betas {
            collect(&mut errors, check_beta(b));
        }
        if p.n == 0 {
            errors.push(Error::invalid("n", "must be >= 1"));
        }
        collect(&mut errors, p.sensor.build(None).and_then(|s| check_sensor(&s, p.accounting)));
        if let Some(adv) = &p.advantage {
            collect(&mut errors, check_beta(adv.beta));
            if adv.deltas.len() < 2 {
                errors.push(Error::invalid("advantage.deltas", "need at least two values"));
            }
            for &d in &adv.deltas {
                collect(&mut errors, p.sensor.build(Some(d)).and_then(|s| check_sensor(&s, p.accounting)));
            }
        }
        errors
    }

    fn execute(p: &PrecisionBetaParams, _ctx: &RunContext) -> Result<Vec<Artifact>> {
        let sensor = p.sensor.build(None)?;
        let rows = estimation::precision_scan_beta(&sensor, &p.background, &p.betas, p.n, p.accounting)?;
        let mut table = Table::new("precision_vs_beta", &headers(&["beta", "gamma"]));
        let (mut h, mut nh) = (Vec::new(), Vec::new());
        for r in &rows {
            let mut cells = vec![r.beta.into(), r.gamma.into()];
            cells.extend(comparison_cells(&r.comparison));
            table.push(cells);
            h.push((r.beta, r.comparison.hermitian.delta_lambda));
            nh.push((r.beta, r.comparison.non_hermitian.delta_lambda));
        }
        let plot = Plot {
            title: format!("Precision vs beta at N = {}", p.n),
            x_label: "beta".into(),
            y_label: "delta lambda".into(),
            log_x: false,
            log_y: true,
            x_categories: None,
            series: vec![
                Series::new("Hermitian", h, Style::Line),
                Series::new("non-Hermitian", nh, Style::Line),
            ],
        };
        let mut out = vec![Artifact::Csv(table), svg("precision_vs_beta", plot)];

        if let Some(adv) = &p.advantage {
            let noise = p.background.at_beta(adv.beta);
            let law = estimation::advantage_law(&sensor, &noise, &adv.deltas, p.n, p.accounting)?;
            let mut t = Table::new("advantage", &["delta", "amplification", "ratio"]);
            for r in &law.rows {
                t.push(vec![r.delta.into(), r.amplification.into(), r.ratio.into()]);
            }
            out.push(Artifact::Csv(t));
            out.push(json(
                "advantage_summary",
                serde_json::json!({
                    "beta": adv.beta,
                    "alpha": 1.0 - adv.beta / 2.0,
                    "slope": law.slope,
                    "predicted_slope": 1.0 - adv.beta,
                }),
            ));
        }
        Ok(out)
    }
}

pub struct PrecisionVsN;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionNParams {
    pub sensor: SensorParams,
    pub noise: NoiseSpec,
    pub n_grid: Grid,
    #[serde(default)]
    pub accounting: Accounting,
}

impl TypedExperiment for PrecisionVsN {
    const NAME: &'static str = "precision-vs-n";
    const DESCRIPTION: &'static str = "precision of both protocols against the number of trials under one noise model";
    type Params = PrecisionNParams;

    fn check(p: &PrecisionNParams) -> Vec<Error> {
        let mut errors = p.noise.violations();
        collect(&mut errors, p.n_grid.counts().map(|_| ()));
        collect(&mut errors, p.sensor.build(None).and_then(|s| check_sensor(&s, p.accounting)));
        errors
    }

    fn execute(p: &PrecisionNParams, _ctx: &RunContext) -> Result<Vec<Artifact>> {
        let sensor = p.sensor.build(None)?;
        let noise = p.noise.build()?;
        let mut table = Table::new("precision_vs_n", &headers(&["n"]));
        let (mut h, mut nh) = (Vec::new(), Vec::new());
        for n in p.n_grid.counts()? {
            let c = estimation::compare(&sensor, noise.as_ref(), n, p.accounting)?;
            let mut cells = vec![Cell::Int(n)];
            cells.extend(comparison_cells(&c));
            table.push(cells);
            h.push((n as f64, c.hermitian.delta_lambda));
            nh.push((n as f64, c.non_hermitian.delta_lambda));
        }
        let plot = Plot {
            title: format!("Precision vs N ({} noise)", p.noise.name()),
            x_label: "N".into(),
            y_label: "delta lambda".into(),
            log_x: true,
            log_y: true,
            x_categories: None,
            series: vec![
                Series::new("Hermitian", h, Style::Line),
                Series::new("non-Hermitian", nh, Style::Line),
            ],
        };
        Ok(vec![Artifact::Csv(table), svg("precision_vs_n", plot)])
    }
}
