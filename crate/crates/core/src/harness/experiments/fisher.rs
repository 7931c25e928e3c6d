use serde::Deserialize;

use super::{collect, json, svg};
use crate::dilation::DilationConfig;
use crate::error::{Error, Result};
use crate::estimation::{self, FisherConfig};
use crate::harness::config::SensorParams;
use crate::harness::output::{Artifact, Table};
use crate::harness::plot::{Plot, Series, Style};
use crate::harness::{RunContext, TypedExperiment};
use crate::noise::NoiseSpec;

pub struct FiCompare;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiParams {
    pub sensor: SensorParams,
    /// Expected detection events per readout.
    pub n_t: f64,
    #[serde(default)]
    pub fisher: FisherConfig,
    pub suite: Vec<NoiseSpec>,
}

impl TypedExperiment for FiCompare {
    const NAME: &'static str = "fi-compare";
    const DESCRIPTION: &'static str = "Monte-Carlo Fisher information of both protocols under each noise model";
    type Params = FiParams;

    fn check(p: &FiParams) -> Vec<Error> {
        let mut errors = p.fisher.violations();
        if p.suite.is_empty() {
            errors.push(Error::invalid("suite", "is empty"));
        }
        for spec in &p.suite {
            errors.extend(spec.violations());
        }
        if !(p.n_t > 0.0 && p.n_t.is_finite()) {
            errors.push(Error::invalid("n_t", format!("must be positive, got {}", p.n_t)));
        }
        collect(
            &mut errors,
            p.sensor.build(None).and_then(|s| {
                crate::dynamics::build_h0(&s)?;
                p.fisher.step(s.lambda)?;
                DilationConfig::new(s).metric_weight().map(|_| ())
            }),
        );
        errors
    }

    fn execute(p: &FiParams, ctx: &RunContext) -> Result<Vec<Artifact>> {
        let sensor = p.sensor.build(None)?;
        let rows = estimation::fi_compare(&p.suite, &sensor, p.n_t, &p.fisher, ctx.seed)?;
        let mut table = Table::new(
            "fi_compare",
            &[
                "noise",
                "f_h",
                "f_h_stderr",
                "f_nh",
                "f_nh_stderr",
                "ratio",
                "ratio_stderr",
                "separation",
                "f_nh_scaled",
                "f_nh_scaled_stderr",
                "ratio_scaled",
                "ratio_scaled_stderr",
                "success_prob",
                "dropped_mass_h",
                "dropped_mass_nh",
                "delta_lambda_step",
            ],
        );
        let mut series = vec![
            Series::new("Hermitian", Vec::new(), Style::Markers),
            Series::new("non-Hermitian", Vec::new(), Style::Markers),
            Series::new("non-Hermitian, N_t P_s", Vec::new(), Style::Markers),
        ];
        for (k, r) in rows.iter().enumerate() {
            table.push(vec![
                r.noise.as_str().into(),
                r.hermitian.value.into(),
                r.hermitian.stderr.into(),
                r.non_hermitian.value.into(),
                r.non_hermitian.stderr.into(),
                r.ratio.into(),
                r.ratio_stderr.into(),
                r.separation.into(),
                r.non_hermitian_scaled.value.into(),
                r.non_hermitian_scaled.stderr.into(),
                r.ratio_scaled.into(),
                r.ratio_scaled_stderr.into(),
                r.success_prob.into(),
                r.hermitian.dropped_mass.into(),
                r.non_hermitian.dropped_mass.into(),
                r.hermitian.delta_lambda_step.into(),
            ]);
            series[0].points.push((k as f64, r.hermitian.value));
            series[1].points.push((k as f64, r.non_hermitian.value));
            series[2].points.push((k as f64, r.non_hermitian_scaled.value));
        }
        let plot = Plot {
            title: format!("Fisher information, N_t = {}", p.n_t),
            x_label: "noise model".into(),
            y_label: "F_lambda".into(),
            log_x: false,
            log_y: true,
            x_categories: Some(rows.iter().map(|r| r.noise.clone()).collect()),
            series,
        };
        Ok(vec![Artifact::Csv(table), svg("fi_compare", plot), json("fi_estimates", &rows)])
    }
}
