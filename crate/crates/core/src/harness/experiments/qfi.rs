use serde::Deserialize;

use super::{collect, svg, Grid};
use crate::dilation::{self, DilationConfig};
use crate::error::{Error, Result};
use crate::harness::config::SensorParams;
use crate::harness::output::{Artifact, Table};
use crate::harness::plot::{Plot, Series, Style};
use crate::harness::{RunContext, TypedExperiment};

pub struct QfiScan;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiParams {
    pub sensor: SensorParams,
    pub deltas: Grid,
}

impl TypedExperiment for QfiScan {
    const NAME: &'static str = "qfi-scan";
    const DESCRIPTION: &'static str = "naive, success-weighted and dilated quantum Fisher information across delta";
    type Params = QfiParams;

    fn check(p: &QfiParams) -> Vec<Error> {
        let mut errors = Vec::new();
        match p.deltas.values() {
            Err(e) => errors.push(e),
            Ok(ds) => {
                for d in ds {
                    collect(
                        &mut errors,
                        p.sensor
                            .build(Some(d))
                            .and_then(|s| dilation::build_dilation(&DilationConfig::new(s)).map(|_| ())),
                    );
                }
            }
        }
        errors
    }

    fn execute(p: &QfiParams, _ctx: &RunContext) -> Result<Vec<Artifact>> {
        let base = p.sensor.build(Some(p.deltas.values()?[0]))?;
        let rows = dilation::qfi_scan(&base, &p.deltas.values()?)?;
        let mut table = Table::new(
            "qfi_scan",
            &["delta", "naive_qfi", "success_prob", "weighted_qfi", "dilated_qfi"],
        );
        let mut series = vec![
            Series::new("naive", Vec::new(), Style::Line),
            Series::new("P_s weighted", Vec::new(), Style::Line),
            Series::new("dilated", Vec::new(), Style::Dashed),
        ];
        for r in &rows {
            table.push(vec![
                r.delta.into(),
                r.naive_qfi.into(),
                r.success_prob.into(),
                r.weighted_qfi.into(),
                r.dilated_qfi.into(),
            ]);
            series[0].points.push((r.delta, r.naive_qfi));
            series[1].points.push((r.delta, r.weighted_qfi));
            series[2].points.push((r.delta, r.dilated_qfi));
        }
        let plot = Plot {
            title: "Quantum Fisher information vs delta".into(),
            x_label: "delta".into(),
            y_label: "QFI".into(),
            log_x: true,
            log_y: true,
            x_categories: None,
            series,
        };
        Ok(vec![Artifact::Csv(table), svg("qfi_scan", plot)])
    }
}
