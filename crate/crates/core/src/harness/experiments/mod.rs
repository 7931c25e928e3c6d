//! The registered experiments, one per reproduced figure family.

mod dynamics;
mod fisher;
mod precision;
mod qfi;
mod scaling;

use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::error::{Error, Result};

pub use dynamics::{ChiVsDelta, EpSplitting};
pub use fisher::FiCompare;
pub use precision::{PrecisionVsBeta, PrecisionVsN};
pub use qfi::QfiScan;
pub use scaling::BetaScaling;

pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(ChiVsDelta),
        Box::new(EpSplitting),
        Box::new(BetaScaling),
        Box::new(PrecisionVsBeta),
        Box::new(PrecisionVsN),
        Box::new(QfiScan),
        Box::new(FiCompare),
    ]
}

/// A list of values, or `points` samples spaced evenly (in log if `log`)
/// from `from` to `to` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Values(v) if v.is_empty() => Err(Error::invalid("grid", "is empty")),
            Grid::Values(v) => Ok(v.clone()),
            Grid::Range(r) => {
                if r.points < 2 {
                    return Err(Error::invalid("grid", "a range needs at least two points"));
                }
                if r.log && !(r.from > 0.0 && r.to > 0.0) {
                    return Err(Error::invalid("grid", "log range endpoints must be positive"));
                }
                let (a, b) = if r.log { (r.from.ln(), r.to.ln()) } else { (r.from, r.to) };
                Ok((0..r.points)
                    .map(|k| {
                        let u = a + (b - a) * k as f64 / (r.points - 1) as f64;
                        if r.log {
                            u.exp()
                        } else {
                            u
                        }
                    })
                    .collect())
            }
        }
    }

    /// Values rounded to positive trial counts.
    pub fn counts(&self) -> Result<Vec<u64>> {
        self.values()?
            .into_iter()
            .map(|v| {
                if v >= 1.0 && v.is_finite() {
                    Ok(v.round() as u64)
                } else {
                    Err(Error::invalid("grid", format!("trial counts must be >= 1, got {v}")))
                }
            })
            .collect()
    }
}

/// Collect the errors of a fallible check into a violation list.
pub(crate) fn collect(errors: &mut Vec<Error>, r: Result<()>) {
    if let Err(e) = r {
        errors.push(e);
    }
}

pub(crate) fn json(name: &str, value: impl Serialize) -> super::Artifact {
    super::Artifact::Json {
        name: name.to_string(),
        value: serde_json::to_value(value).expect("serializable summary"),
    }
}

pub(crate) fn svg(name: &str, plot: super::plot::Plot) -> super::Artifact {
    super::Artifact::Svg {
        name: name.to_string(),
        body: plot.render(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let names: Vec<_> = registry().iter().map(|e| e.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert_eq!(names.len(), 7);
    }

    #[test]
    fn log_range_hits_endpoints() {
        let g = Grid::Range(GridRange {
            from: 100.0,
            to: 10_000.0,
            points: 5,
            log: true,
        });
        let v = g.values().unwrap();
        assert!((v[0] - 100.0).abs() < 1e-9 && (v[4] - 10_000.0).abs() < 1e-7);
        assert!((v[2] - 1000.0).abs() < 1e-8);
        assert_eq!(g.counts().unwrap(), vec![100, 316, 1000, 3162, 10000]);
    }
}
