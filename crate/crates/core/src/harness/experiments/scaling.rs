use serde::Deserialize;

use super::{svg, Grid};
use crate::error::{Error, Result};
use crate::harness::output::{Artifact, Table};
use crate::harness::plot::{Plot, Series, Style};
use crate::harness::{RunContext, TypedExperiment};
use crate::noise::CorrelatedNoiseSpec;

pub struct BetaScaling;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaParams {
    pub gammas: Vec<f64>,
    pub n_grid: Grid,
    pub c: f64,
    pub sigma_xi: f64,
}

impl BetaParams {
    fn spec(&self, gamma: f64) -> CorrelatedNoiseSpec {
        CorrelatedNoiseSpec::new(gamma, self.c, self.sigma_xi, 1.0)
    }

    fn grid(&self) -> Result<Vec<usize>> {
        Ok(self.n_grid.counts()?.into_iter().map(|n| n as usize).collect())
    }
}

impl TypedExperiment for BetaScaling {
    const NAME: &'static str = "beta-scaling";
    const DESCRIPTION: &'static str = "fitted growth exponent of the correlated noise sum S_N across gamma";
    type Params = BetaParams;

    fn check(p: &BetaParams) -> Vec<Error> {
        let mut errors = Vec::new();
        if p.gammas.is_empty() {
            errors.push(Error::invalid("gammas", "is empty"));
        }
        for &g in &p.gammas {
            errors.extend(p.spec(g).violations());
        }
        match p.grid() {
            Err(e) => errors.push(e),
            Ok(grid) => {
                if let Some(&g) = p.gammas.first() {
                    if let Err(e) = p.spec(g).fit_beta(&grid) {
                        errors.push(e);
                    }
                }
            }
        }
        errors
    }

    fn execute(p: &BetaParams, _ctx: &RunContext) -> Result<Vec<Artifact>> {
        let grid = p.grid()?;
        let mut fits = Table::new("beta_scaling", &["gamma", "beta_fit"]);
        let mut sums = Table::new("correlated_sum", &["gamma", "n", "s_n"]);
        let (mut fitted, mut predicted) = (Vec::new(), Vec::new());
        for &g in &p.gammas {
            let spec = p.spec(g);
            let beta = spec.fit_beta(&grid)?;
            fits.push(vec![g.into(), beta.into()]);
            for &n in &grid {
                sums.push(vec![g.into(), (n as u64).into(), spec.correlated_sum(n).into()]);
            }
            fitted.push((g, beta));
            predicted.push((g, if g < 1.0 { 2.0 - g } else { 1.0 }));
        }
        predicted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let plot = Plot {
            title: "Growth exponent of S_N".into(),
            x_label: "gamma".into(),
            y_label: "beta".into(),
            log_x: false,
            log_y: false,
            x_categories: None,
            series: vec![
                Series::new("fit", fitted, Style::Markers),
                Series::new("max(2 - gamma, 1)", predicted, Style::Dashed),
            ],
        };
        Ok(vec![Artifact::Csv(fits), Artifact::Csv(sums), svg("beta_scaling", plot)])
    }
}
