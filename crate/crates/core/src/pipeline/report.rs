use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stats::BoxStats;
use crate::convnet::EpochStats;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentFailure {
    pub stage: String,
    pub segment: usize,
    pub record: usize,
    pub start_sample: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    /// Correct test predictions over test size; absent when the fold failed.
    pub accuracy: Option<f64>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<EpochStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub repeat: usize,
    pub stats: Option<BoxStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub variant: String,
    pub tfd: String,
    pub layers: usize,
    pub filter: usize,
    pub rank: usize,
    pub config_hash: String,
    pub seed: u64,
    pub n_folds: usize,
    pub n_repeats: usize,
    pub n_segments: usize,
    /// Segments per class id.
    pub class_counts: Vec<usize>,
    pub folds: Vec<FoldOutcome>,
    pub mean_accuracy: Option<f64>,
    pub std_accuracy: Option<f64>,
    pub overall: Option<BoxStats>,
    pub repeats: Vec<RepeatSummary>,
    /// False when any fold failed.
    pub complete: bool,
    pub segment_failures: Vec<SegmentFailure>,
    pub wall_time_s: f64,
}

impl Report {
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.accuracy).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the wall time zeroed, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        r.to_json()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
