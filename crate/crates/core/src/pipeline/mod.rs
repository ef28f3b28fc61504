//! End-to-end experiments: segmentation, time-frequency images, per-variant
//! reduction, classifiers under stratified k-fold cross-validation, rank
//! sweeps and method comparisons.

mod compare;
mod config;
mod folds;
mod prepare;
mod report;
mod run;
mod stats;
mod sweep;

pub use compare::{architecture_grid, compare_methods, write_summary_csv, Comparison, SummaryRow};
pub use config::{DataSource, DwtOptions, ExperimentConfig, Grouping, ProjectorScope, RecordSource, SliceInput, Variant};
pub use folds::{kfold_split, FoldSplit};
pub use prepare::{cnn_inputs, CnnInputs, load_segments, segment_tensor, standardize_channels};
pub use report::{FoldOutcome, Report, SegmentFailure};
pub use run::run_pipeline;
pub use stats::{mean_std, BoxStats};
pub use sweep::{rank_sweep, rank_sweep_tensors, write_rank_curve, RankPoint};

/// Mixes a base seed with a path of indices (splitmix64 finalizer per step),
/// so every job gets an independent, reproducible stream.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut z = base;
    for &p in path {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}
