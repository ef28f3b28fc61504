use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Grouping, ProjectorScope, SliceInput, Variant};
use super::derive_seed;
use super::folds::{kfold_split, FoldSplit};
use super::prepare::{concat_time, load_segments, prepare, super_slice_volume, Prepared};
use super::report::{FoldOutcome, RepeatSummary, Report};
use super::stats::{mean_std, BoxStats};
use crate::baselines::{knn_classify, svm_predict, svm_train, FeatureVector};
use crate::convnet::{forward, init_network, predict, train_monitored, Architecture, EpochStats, Hyperparameters};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{cp_als, AlsOptions};

/// Runs the configured variant under `repeats × folds` cross-validation.
///
/// Segment-level failures are recorded in the report and fail every fold
/// that needs the segment; the report is then marked incomplete. Errors are
/// returned only for invalid configurations and unreadable data.
pub fn run_pipeline<T: Scalar>(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let segments = load_segments::<T>(cfg)?;
    let labels: Vec<usize> = segments.iter().map(|s| s.class_id).collect();
    let n_classes = labels.iter().copied().max().unwrap_or(0).max(1) + 1;
    let mut class_counts = vec![0; n_classes];
    labels.iter().for_each(|&l| class_counts[l] += 1);

    let train_fit = cfg.variant == Variant::TensorCnn && cfg.projector_scope == ProjectorScope::TrainFit;
    let (prepared, segment_failures) = prepare(cfg, &segments, train_fit);

    let mut jobs = Vec::with_capacity(cfg.repeats * cfg.folds);
    for repeat in 0..cfg.repeats {
        let splits = split_for(cfg, &segments, &labels, cfg.seed.wrapping_add(repeat as u64))?;
        for (fold, split) in splits.into_iter().enumerate() {
            jobs.push((repeat, fold, split));
        }
    }

    let folds: Vec<FoldOutcome> = jobs
        .par_iter()
        .map(|(repeat, fold, split)| {
            let mut outcome = FoldOutcome {
                repeat: *repeat,
                fold: *fold,
                n_train: split.train.len(),
                n_validation: split.validation.len(),
                n_test: split.test.len(),
                accuracy: None,
                confusion: None,
                history: Vec::new(),
                error: None,
            };
            match run_fold(cfg, &prepared, &labels, n_classes, split, *repeat, *fold) {
                Ok((predictions, history)) => {
                    let mut confusion = vec![vec![0; n_classes]; n_classes];
                    for (&i, &p) in split.test.iter().zip(&predictions) {
                        confusion[labels[i]][p] += 1;
                    }
                    let hits = split.test.iter().zip(&predictions).filter(|(&i, &p)| labels[i] == p).count();
                    outcome.accuracy = Some(hits as f64 / split.test.len() as f64);
                    outcome.confusion = Some(confusion);
                    outcome.history = history;
                }
                Err(e) => outcome.error = Some(e.to_string()),
            }
            outcome
        })
        .collect();

    let accs: Vec<f64> = folds.iter().filter_map(|f| f.accuracy).collect();
    let (mean, std) = if accs.is_empty() { (None, None) } else {
        let (m, s) = mean_std(&accs);
        (Some(m), Some(s))
    };
    let repeats = (0..cfg.repeats)
        .map(|r| {
            let v: Vec<f64> = folds.iter().filter(|f| f.repeat == r).filter_map(|f| f.accuracy).collect();
            RepeatSummary {
                repeat: r,
                stats: BoxStats::from_values(&v),
            }
        })
        .collect();
    Ok(Report {
        variant: cfg.variant.name().into(),
        tfd: cfg.tfd.name().into(),
        layers: cfg.layers,
        filter: cfg.filter,
        rank: cfg.rank,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        n_folds: cfg.folds,
        n_repeats: cfg.repeats,
        n_segments: segments.len(),
        class_counts,
        complete: folds.iter().all(|f| f.error.is_none()),
        overall: BoxStats::from_values(&accs),
        folds,
        mean_accuracy: mean,
        std_accuracy: std,
        repeats,
        segment_failures,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn split_for<T: Scalar>(
    cfg: &ExperimentConfig,
    segments: &[crate::signal::Segment<T>],
    labels: &[usize],
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    match cfg.grouping {
        Grouping::Segment => kfold_split(labels.len(), cfg.folds, labels, seed),
        Grouping::Record => {
            let n_records = segments.iter().map(|s| s.origin.record).max().unwrap_or(0) + 1;
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_records];
            segments.iter().enumerate().for_each(|(i, s)| members[s.origin.record].push(i));
            let groups: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
            let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;
            let group_labels: Vec<usize> = groups
                .iter()
                .map(|m| {
                    let mut counts = vec![0usize; n_classes];
                    m.iter().for_each(|&i| counts[labels[i]] += 1);
                    // majority, ties toward the higher class id
                    (0..n_classes).rev().max_by_key(|&c| (counts[c], c)).unwrap()
                })
                .collect();
            let splits = kfold_split(groups.len(), cfg.folds, &group_labels, seed)?;
            let expand = |g: &[usize]| {
                let mut v: Vec<usize> = g.iter().flat_map(|&gi| groups[gi].iter().copied()).collect();
                v.sort_unstable();
                v
            };
            Ok(splits
                .into_iter()
                .map(|s| FoldSplit {
                    train: expand(&s.train),
                    validation: expand(&s.validation),
                    test: expand(&s.test),
                })
                .collect())
        }
    }
}

fn gather<'a, T>(items: &'a [Option<T>], idx: &[usize]) -> Result<Vec<&'a T>> {
    idx.iter()
        .map(|&i| {
            items[i].as_ref().ok_or_else(|| Error::Stage {
                stage: "prepare".into(),
                subject: format!("segment {i}"),
                message: "segment has no usable representation (see segment_failures)".into(),
            })
        })
        .collect()
}

type FoldResult = (Vec<usize>, Vec<EpochStats>);

fn run_fold<T: Scalar>(
    cfg: &ExperimentConfig,
    prepared: &Prepared<T>,
    labels: &[usize],
    n_classes: usize,
    split: &FoldSplit,
    repeat: usize,
    fold: usize,
) -> Result<FoldResult> {
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    match prepared {
        Prepared::Volumes { data, shape } => {
            let train: Vec<Vec<T>> = gather(data, &split.train)?.into_iter().cloned().collect();
            let val: Vec<Vec<T>> = gather(data, &split.validation)?.into_iter().cloned().collect();
            let test: Vec<Vec<T>> = gather(data, &split.test)?.into_iter().cloned().collect();
            cnn_fold(cfg, *shape, n_classes, (&train, &pick(&split.train)), (&val, &pick(&split.validation)), &test, repeat, fold)
        }
        Prepared::Tensors(tensors) => {
            let train_t = gather(tensors, &split.train)?;
            let big = concat_time(&train_t)?;
            let opts = AlsOptions {
                seed: derive_seed(cfg.als.seed, &[cfg.seed, repeat as u64, fold as u64, 0x7F]),
                ..cfg.als.clone()
            };
            let fit = cp_als(&big, cfg.rank, &opts).map_err(|e| Error::Stage {
                stage: "decompose".into(),
                subject: format!("training tensor of repeat {repeat} fold {fold}"),
                message: e.to_string(),
            })?;
            let c = &fit.factors.c;
            let vols = |idx: &[usize]| -> Result<Vec<Vec<T>>> {
                gather(tensors, idx)?
                    .into_iter()
                    .map(|x| super_slice_volume(x, c))
                    .collect()
            };
            let (h, w) = cfg.image_dims;
            cnn_fold(
                cfg,
                (cfg.rank, h, w),
                n_classes,
                (&vols(&split.train)?, &pick(&split.train)),
                (&vols(&split.validation)?, &pick(&split.validation)),
                &vols(&split.test)?,
                repeat,
                fold,
            )
        }
        Prepared::Features(feats) => {
            let train = gather(feats, &split.train)?;
            let test = gather(feats, &split.test)?;
            let (mean, scale) = if cfg.variant == Variant::DwtKnn && cfg.knn_standardize {
                column_stats(&train)
            } else {
                let d = train.first().map_or(0, |v| v.len());
                (vec![T::zero(); d], vec![T::one(); d])
            };
            let norm = |v: &Vec<T>| -> Vec<T> {
                v.iter().zip(mean.iter().zip(&scale)).map(|(&x, (&m, &s))| (x - m) / s).collect()
            };
            let train_fv: Vec<FeatureVector<T>> = train
                .iter()
                .zip(&split.train)
                .map(|(v, &i)| FeatureVector::new(norm(v), labels[i]))
                .collect::<Result<_>>()?;
            let predictions = match cfg.variant {
                Variant::DwtKnn => {
                    let k = cfg.knn_k.min(train_fv.len());
                    test.iter().map(|v| knn_classify(&train_fv, k, &norm(v))).collect::<Result<Vec<_>>>()?
                }
                _ => {
                    let model = svm_train(&train_fv, &cfg.svm)?;
                    test.iter().map(|v| svm_predict(&model, v)).collect::<Result<Vec<_>>>()?
                }
            };
            Ok((predictions, Vec::new()))
        }
    }
}

fn column_stats<T: Scalar>(rows: &[&Vec<T>]) -> (Vec<T>, Vec<T>) {
    let d = rows.first().map_or(0, |v| v.len());
    let n = T::from_usize_lossy(rows.len().max(1));
    let mean: Vec<T> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<T>() / n).collect();
    let scale = (0..d)
        .map(|j| {
            let s = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<T>() / n).sqrt();
            if s > T::zero() {
                s
            } else {
                T::one()
            }
        })
        .collect();
    (mean, scale)
}

#[allow(clippy::too_many_arguments)]
fn cnn_fold<T: Scalar>(
    cfg: &ExperimentConfig,
    shape: (usize, usize, usize),
    n_classes: usize,
    train: (&[Vec<T>], &[usize]),
    validation: (&[Vec<T>], &[usize]),
    test: &[Vec<T>],
    repeat: usize,
    fold: usize,
) -> Result<FoldResult> {
    let h = &cfg.hyper;
    let base = derive_seed(h.seed, &[cfg.seed, repeat as u64, fold as u64]);
    if cfg.variant == Variant::TensorCnn && cfg.slice_input == SliceInput::Vote {
        return vote_fold(cfg, shape, n_classes, train, validation, test, base);
    }
    let arch = Architecture::with_layer_count(cfg.layers, shape, cfg.filter, &h.feature_maps, h.fc_neurons, n_classes)?;
    let net = init_network::<T>(&arch, derive_seed(base, &[1]))?;
    let hyper = Hyperparameters {
        seed: derive_seed(base, &[2]),
        ..h.clone()
    };
    let trained = train_monitored(net, train.0, train.1, &hyper, Some(validation))?;
    Ok((predict(&trained, test)?, trained.history))
}

/// Trains one network per super-slice and averages their class
/// probabilities. The reported history is the per-epoch mean over slices.
fn vote_fold<T: Scalar>(
    cfg: &ExperimentConfig,
    (c, hgt, wid): (usize, usize, usize),
    n_classes: usize,
    train: (&[Vec<T>], &[usize]),
    validation: (&[Vec<T>], &[usize]),
    test: &[Vec<T>],
    base: u64,
) -> Result<FoldResult> {
    let h = &cfg.hyper;
    let plane = hgt * wid;
    let channel = |data: &[Vec<T>], r: usize| -> Vec<Vec<T>> {
        data.iter().map(|v| v[r * plane..(r + 1) * plane].to_vec()).collect()
    };
    let arch = Architecture::with_layer_count(cfg.layers, (1, hgt, wid), cfg.filter, &h.feature_maps, h.fc_neurons, n_classes)?;
    let mut probs = vec![T::zero(); test.len() * n_classes];
    let mut history: Vec<EpochStats> = Vec::new();
    for r in 0..c {
        let net = init_network::<T>(&arch, derive_seed(base, &[1, r as u64]))?;
        let hyper = Hyperparameters {
            seed: derive_seed(base, &[2, r as u64]),
            ..h.clone()
        };
        let val = channel(validation.0, r);
        let trained = train_monitored(net, &channel(train.0, r), train.1, &hyper, Some((&val, validation.1)))?;
        let p = forward(&trained, &channel(test, r))?;
        probs.iter_mut().zip(p.as_slice()).for_each(|(a, &b)| *a += b);
        if history.is_empty() {
            history = trained.history;
        } else {
            for (acc, e) in history.iter_mut().zip(&trained.history) {
                acc.loss += e.loss;
                acc.accuracy += e.accuracy;
                acc.val_accuracy = acc.val_accuracy.zip(e.val_accuracy).map(|(a, b)| a + b);
            }
        }
    }
    let n = c as f64;
    for e in &mut history {
        e.loss /= n;
        e.accuracy /= n;
        e.val_accuracy = e.val_accuracy.map(|v| v / n);
    }
    let predictions = probs
        .chunks(n_classes)
        .map(|row| (0..n_classes).fold(0, |best, j| if row[j] > row[best] { j } else { best }))
        .collect();
    Ok((predictions, history))
}
