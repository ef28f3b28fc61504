use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::prepare::{load_segments, segment_als, segment_tensor};
use super::stats::mean_std;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tensor::{cp_als, cp_als_from, AlsOptions, CpFactors, CpResult, Tensor3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankPoint {
    pub rank: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

/// Normalized CP error against assumed rank, averaged over the configured
/// segments (the first `sweep_segments`, or all).
pub fn rank_sweep<T: Scalar>(cfg: &ExperimentConfig, ranks: &[usize]) -> Result<Vec<RankPoint>> {
    cfg.validate()?;
    check_ranks(ranks)?;
    let mut segments = load_segments::<T>(cfg)?;
    if let Some(n) = cfg.sweep_segments {
        segments.truncate(n.max(1));
    }
    let per_segment: Vec<Vec<f64>> = segments
        .par_iter()
        .enumerate()
        .map(|(i, seg)| {
            let x = segment_tensor(cfg, seg).map_err(|e| Error::Stage {
                stage: "tfr".into(),
                subject: format!("segment {i}"),
                message: e.to_string(),
            })?;
            sweep_one(&x, ranks, &segment_als(cfg, i)).map_err(|e| Error::Stage {
                stage: "decompose".into(),
                subject: format!("segment {i}"),
                message: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(curve(ranks, &per_segment))
}

/// Same sweep over tensors supplied directly; tensor `i` uses seed `opts.seed + i`.
pub fn rank_sweep_tensors<T: Scalar>(tensors: &[Tensor3<T>], ranks: &[usize], opts: &AlsOptions) -> Result<Vec<RankPoint>> {
    check_ranks(ranks)?;
    if tensors.is_empty() {
        return Err(Error::invalid("rank sweep needs at least one tensor"));
    }
    let per: Vec<Vec<f64>> = tensors
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let o = AlsOptions {
                seed: opts.seed.wrapping_add(i as u64),
                ..opts.clone()
            };
            sweep_one(x, ranks, &o)
        })
        .collect::<Result<_>>()?;
    Ok(curve(ranks, &per))
}

fn check_ranks(ranks: &[usize]) -> Result<()> {
    if ranks.is_empty() {
        return Err(Error::invalid("rank list is empty"));
    }
    if ranks[0] == 0 || ranks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ranks must be positive and strictly ascending"));
    }
    Ok(())
}

fn curve(ranks: &[usize], per_segment: &[Vec<f64>]) -> Vec<RankPoint> {
    ranks
        .iter()
        .enumerate()
        .map(|(j, &rank)| {
            let errs: Vec<f64> = per_segment.iter().map(|e| e[j]).collect();
            let (mean_error, std_error) = mean_std(&errs);
            RankPoint {
                rank,
                mean_error,
                std_error,
            }
        })
        .collect()
}

/// Best-of-restarts error for each rank of one tensor.
///
/// From the second rank on, one of the `n_restarts` runs starts from the
/// previous rank's solution padded with a new component whose time factor
/// is zero. That start reproduces the previous fit exactly, and ALS never
/// increases the objective, so the curve cannot go up. The remaining
/// restarts are cold.
fn sweep_one<T: Scalar>(x: &Tensor3<T>, ranks: &[usize], opts: &AlsOptions) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ranks.len());
    let mut prev: Option<CpFactors<T>> = None;
    for &rank in ranks {
        let res = match &prev {
            None => cp_als(x, rank, opts)?,
            Some(p) => {
                let start = pad_factors(p, rank, opts.seed ^ rank as u64);
                let warm = cp_als_from(x, &start, &AlsOptions { n_restarts: 1, ..opts.clone() })?;
                if opts.n_restarts > 1 {
                    let cold = cp_als(x, rank, &AlsOptions { n_restarts: opts.n_restarts - 1, ..opts.clone() })?;
                    better(warm, cold)
                } else {
                    warm
                }
            }
        };
        out.push(res.final_error().as_f64());
        prev = Some(res.factors);
    }
    Ok(out)
}

fn better<T: Scalar>(a: CpResult<T>, b: CpResult<T>) -> CpResult<T> {
    if b.final_error() < a.final_error() {
        b
    } else {
        a
    }
}

fn pad_factors<T: Scalar>(p: &CpFactors<T>, rank: usize, seed: u64) -> CpFactors<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let old = p.rank();
    let mut pad = |m: &Matrix<T>, zero: bool| {
        Matrix::from_fn(m.rows(), rank, |i, j| {
            if j < old {
                m[(i, j)]
            } else if zero {
                T::zero()
            } else {
                let v: f64 = StandardNormal.sample(&mut rng);
                T::c(v)
            }
        })
    };
    let a = pad(&p.a, true);
    let b = pad(&p.b, false);
    let c = pad(&p.c, false);
    CpFactors { a, b, c }
}

/// Writes the curve as CSV with header `rank,mean_error,std_error`.
pub fn write_rank_curve(path: impl AsRef<Path>, curve: &[RankPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
