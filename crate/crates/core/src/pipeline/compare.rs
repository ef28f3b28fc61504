use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::Report;
use super::run::run_pipeline;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tfr::TfdMethod;

/// One line of the comparison table. Statistics are over every fold of
/// every repeat and are empty when no fold finished.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    pub tfd: String,
    pub layers: usize,
    pub filter: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<f64>,
}

impl SummaryRow {
    pub fn from_report(r: &Report) -> Self {
        let o = r.overall.as_ref();
        Self {
            variant: r.variant.clone(),
            tfd: r.tfd.clone(),
            layers: r.layers,
            filter: r.filter,
            mean: r.mean_accuracy,
            std: r.std_accuracy,
            min: o.map(|s| s.min),
            q1: o.map(|s| s.q1),
            median: o.map(|s| s.median),
            q3: o.map(|s| s.q3),
            max: o.map(|s| s.max),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub reports: Vec<Report>,
    pub rows: Vec<SummaryRow>,
}

/// Runs every configuration and tabulates the results in input order.
pub fn compare_methods<T: Scalar>(configs: &[ExperimentConfig]) -> Result<Comparison> {
    let first = configs
        .first()
        .filter(|_| configs.len() >= 2)
        .ok_or_else(|| Error::invalid("comparison needs at least two configurations"))?;
    for (i, c) in configs.iter().enumerate().skip(1) {
        if c.data != first.data || c.segment_seconds != first.segment_seconds || c.overlap != first.overlap {
            return Err(Error::invalid(format!("configuration {i} uses a different data source")));
        }
        if c.seed != first.seed {
            return Err(Error::invalid(format!("configuration {i} uses a different seed")));
        }
    }
    configs.iter().try_for_each(ExperimentConfig::validate)?;
    let reports = configs.iter().map(run_pipeline::<T>).collect::<Result<Vec<_>>>()?;
    let rows = reports.iter().map(SummaryRow::from_report).collect();
    Ok(Comparison { reports, rows })
}

/// Every combination of layer count, filter size and TFD method applied to
/// `base`, layers varying slowest. The kernel override is dropped so each
/// method gets its own defaults.
pub fn architecture_grid(base: &ExperimentConfig, layers: &[usize], filters: &[usize], tfds: &[TfdMethod]) -> Vec<ExperimentConfig> {
    let mut out = Vec::with_capacity(layers.len() * filters.len() * tfds.len());
    for &l in layers {
        for &f in filters {
            for &m in tfds {
                out.push(ExperimentConfig {
                    layers: l,
                    filter: f,
                    tfd: m,
                    kernel: None,
                    ..base.clone()
                });
            }
        }
    }
    out
}

pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
