use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, ProjectorScope, SliceInput, Variant};
use super::derive_seed;
use super::report::SegmentFailure;
use crate::baselines::{dwt, dwt_features, pca_fit, pca_transform, PcaSelection};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::signal::{load_record, segment_record, synthesize_dataset, Segment};
use crate::tensor::{build_projector, cp_als, stack_images, super_slices, AlsOptions, Tensor3};
use crate::tfr::segment_to_images;

fn stage_error(stage: &str, subject: impl Into<String>, e: Error) -> Error {
    Error::Stage {
        stage: stage.into(),
        subject: subject.into(),
        message: e.to_string(),
    }
}

/// Loads or synthesizes the records and cuts them into labeled segments,
/// in record order.
pub fn load_segments<T: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<Segment<T>>> {
    let records = match &cfg.data {
        DataSource::Synth(spec) => synthesize_dataset::<T>(spec)?,
        DataSource::Records(sources) => sources
            .iter()
            .map(|s| load_record::<T>(&s.csv, &s.meta).map_err(|e| stage_error("load", s.csv.display().to_string(), e)))
            .collect::<Result<Vec<_>>>()?,
    };
    if let Some(first) = records.first() {
        let k = first.n_channels();
        if let Some((i, _)) = records.iter().enumerate().find(|(_, r)| r.n_channels() != k) {
            return Err(Error::InvalidRecord(format!("record {i} has a different channel count than record 0")));
        }
    }
    let mut segments = Vec::new();
    for (i, r) in records.iter().enumerate() {
        segments.extend(segment_record(r, i, cfg.segment_seconds, cfg.overlap)?);
    }
    if segments.is_empty() {
        return Err(Error::InvalidRecord("no complete segment in the data".into()));
    }
    Ok(segments)
}

/// Channel images of one segment stacked into a `time × frequency × channel` tensor.
pub fn segment_tensor<T: Scalar>(cfg: &ExperimentConfig, seg: &Segment<T>) -> Result<Tensor3<T>> {
    let kernel = cfg.kernel_for(seg.fs);
    let images = segment_to_images(seg, &kernel, cfg.n_fft_for(seg.fs), cfg.image_dims)?;
    stack_images(&images)
}

/// Flattens a tensor into CNN channel order `[k][t][f]`.
fn tensor_to_volume<T: Scalar>(x: &Tensor3<T>) -> Vec<T> {
    let (nt, nf, nk) = x.dims();
    let mut out = Vec::with_capacity(nt * nf * nk);
    for k in 0..nk {
        for t in 0..nt {
            for f in 0..nf {
                out.push(x.get(t, f, k));
            }
        }
    }
    out
}

/// Shifts and scales every channel plane to zero mean and unit standard
/// deviation (constant planes are only centered).
pub fn standardize_channels<T: Scalar>(volume: &mut [T], plane: usize) {
    for ch in volume.chunks_mut(plane) {
        let n = T::from_usize_lossy(ch.len());
        let mean = ch.iter().copied().sum::<T>() / n;
        let std = (ch.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n).sqrt();
        let scale = if std > T::zero() { std } else { T::one() };
        ch.iter_mut().for_each(|v| *v = (*v - mean) / scale);
    }
}

pub(crate) fn segment_als(cfg: &ExperimentConfig, segment: usize) -> AlsOptions {
    AlsOptions {
        seed: derive_seed(cfg.als.seed, &[cfg.seed, segment as u64]),
        ..cfg.als.clone()
    }
}

pub(crate) fn super_slice_volume<T: Scalar>(x: &Tensor3<T>, c: &Matrix<T>) -> Result<Vec<T>> {
    let p = build_projector(c)?;
    let s = super_slices(x, &p)?;
    let (nt, nf, _) = s.dims();
    let mut v = tensor_to_volume(&s);
    standardize_channels(&mut v, nt * nf);
    Ok(v)
}

/// Per-segment model input, computed once for all folds.
pub(crate) enum Prepared<T> {
    /// CNN volumes with their `(channels, height, width)` shape.
    Volumes { data: Vec<Option<Vec<T>>>, shape: (usize, usize, usize) },
    /// Channel tensors awaiting a per-fold projector.
    Tensors(Vec<Option<Tensor3<T>>>),
    Features(Vec<Option<Vec<T>>>),
}

pub(crate) fn prepare<T: Scalar>(
    cfg: &ExperimentConfig,
    segments: &[Segment<T>],
    train_fit: bool,
) -> (Prepared<T>, Vec<SegmentFailure>) {
    let k = segments[0].n_channels();
    let (h, w) = cfg.image_dims;
    let results: Vec<std::result::Result<Prepared1<T>, SegmentFailure>> = segments
        .par_iter()
        .enumerate()
        .map(|(i, seg)| prepare_one(cfg, i, seg, train_fit))
        .collect();
    let mut failures = Vec::new();
    let mut items = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(p) => items.push(Some(p)),
            Err(f) => {
                failures.push(f);
                items.push(None);
            }
        }
    }
    let prepared = match cfg.variant {
        _ if train_fit => Prepared::Tensors(items.into_iter().map(|p| p.map(Prepared1::into_tensor)).collect()),
        Variant::DwtKnn | Variant::DwtSvm => {
            Prepared::Features(items.into_iter().map(|p| p.map(Prepared1::into_vec)).collect())
        }
        v => {
            let shape = match v {
                Variant::TensorCnn => (cfg.rank, h, w),
                Variant::TfCnnNoReduction => (k, h, w),
                _ => {
                    let n = match cfg.pca {
                        PcaSelection::Count(n) => n,
                        PcaSelection::Variance(_) => unreachable!("rejected by validation"),
                    };
                    (k, h, n)
                }
            };
            Prepared::Volumes {
                data: items.into_iter().map(|p| p.map(Prepared1::into_vec)).collect(),
                shape,
            }
        }
    };
    (prepared, failures)
}

pub(crate) enum Prepared1<T> {
    Vec(Vec<T>),
    Tensor(Tensor3<T>),
}

impl<T> Prepared1<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            Prepared1::Vec(v) => v,
            Prepared1::Tensor(_) => unreachable!("variant produces vectors"),
        }
    }

    fn into_tensor(self) -> Tensor3<T> {
        match self {
            Prepared1::Tensor(t) => t,
            Prepared1::Vec(_) => unreachable!("variant produces tensors"),
        }
    }
}

fn prepare_one<T: Scalar>(
    cfg: &ExperimentConfig,
    i: usize,
    seg: &Segment<T>,
    train_fit: bool,
) -> std::result::Result<Prepared1<T>, SegmentFailure> {
    let fail = |stage: &str, e: Error| SegmentFailure {
        stage: stage.into(),
        segment: i,
        record: seg.origin.record,
        start_sample: seg.origin.start_sample,
        message: e.to_string(),
    };
    match cfg.variant {
        Variant::DwtKnn | Variant::DwtSvm => {
            let mut feats = Vec::new();
            for k in 0..seg.n_channels() {
                let bands = dwt(&seg.channel(k), cfg.dwt.levels, cfg.dwt.wavelet, cfg.dwt.extension)
                    .map_err(|e| fail("dwt", e))?;
                feats.extend(dwt_features(&bands));
            }
            Ok(Prepared1::Vec(feats))
        }
        variant => {
            let x = segment_tensor(cfg, seg).map_err(|e| fail("tfr", e))?;
            if train_fit {
                return Ok(Prepared1::Tensor(x));
            }
            let (nt, nf, nk) = x.dims();
            match variant {
                Variant::TensorCnn => {
                    let res = cp_als(&x, cfg.rank, &segment_als(cfg, i)).map_err(|e| fail("decompose", e))?;
                    let v = super_slice_volume(&x, &res.factors.c).map_err(|e| fail("projector", e))?;
                    Ok(Prepared1::Vec(v))
                }
                Variant::TfCnnNoReduction => {
                    let mut v = tensor_to_volume(&x);
                    standardize_channels(&mut v, nt * nf);
                    Ok(Prepared1::Vec(v))
                }
                _ => {
                    let n = match cfg.pca {
                        PcaSelection::Count(n) => n,
                        PcaSelection::Variance(_) => unreachable!("rejected by validation"),
                    };
                    let mut v = Vec::with_capacity(nk * nt * n);
                    for k in 0..nk {
                        let model = pca_fit(&x.slice(k), n).map_err(|e| fail("pca", e))?;
                        let scores = pca_transform(&model, &x.slice(k)).map_err(|e| fail("pca", e))?;
                        v.extend_from_slice(scores.as_slice());
                    }
                    standardize_channels(&mut v, nt * n);
                    Ok(Prepared1::Vec(v))
                }
            }
        }
    }
}

/// Flattened CNN input volumes and their `(channels, height, width)` shape.
pub type CnnInputs<T> = (Vec<Vec<T>>, (usize, usize, usize));

/// CNN inputs for every segment, with their `(channels, height, width)`
/// shape. Fails on the first segment that cannot be prepared, and for
/// variants or scopes without a fixed per-segment input.
pub fn cnn_inputs<T: Scalar>(cfg: &ExperimentConfig, segments: &[Segment<T>]) -> Result<CnnInputs<T>> {
    cfg.validate()?;
    if !cfg.variant.uses_cnn() {
        return Err(Error::invalid(format!("variant {} has no CNN input", cfg.variant.name())));
    }
    if cfg.projector_scope == ProjectorScope::TrainFit && cfg.variant == Variant::TensorCnn {
        return Err(Error::invalid("train-fit projectors exist only inside cross-validation folds"));
    }
    if cfg.slice_input == SliceInput::Vote && cfg.variant == Variant::TensorCnn {
        return Err(Error::invalid("slice voting is available only inside cross-validation folds"));
    }
    if segments.is_empty() {
        return Err(Error::InvalidRecord("no segments".into()));
    }
    match prepare(cfg, segments, false) {
        (_, failures) if !failures.is_empty() => {
            let f = &failures[0];
            Err(Error::Stage {
                stage: f.stage.clone(),
                subject: format!("segment {} (record {}, sample {})", f.segment, f.record, f.start_sample),
                message: f.message.clone(),
            })
        }
        (Prepared::Volumes { data, shape }, _) => Ok((data.into_iter().flatten().collect(), shape)),
        _ => unreachable!("CNN variants prepare volumes"),
    }
}

/// Concatenates tensors along time.
pub(crate) fn concat_time<T: Scalar>(parts: &[&Tensor3<T>]) -> Result<Tensor3<T>> {
    let (nt, nf, nk) = parts.first().ok_or_else(|| Error::invalid("no tensors to concatenate"))?.dims();
    if parts.iter().any(|p| p.dims() != (nt, nf, nk)) {
        return Err(Error::dims("tensors to concatenate differ in shape"));
    }
    let data = parts.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
    Tensor3::new((nt * parts.len(), nf, nk), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardized_planes() {
        let mut v = vec![1.0, 2.0, 3.0, 5.0, 5.0, 5.0];
        standardize_channels(&mut v, 3);
        let m: f64 = v[..3].iter().sum::<f64>() / 3.0;
        let s: f64 = (v[..3].iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 3.0).sqrt();
        assert!(m.abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
        assert_eq!(&v[3..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn time_concatenation() {
        let a = Tensor3::from_fn((2, 2, 1), |t, f, _| (t * 2 + f) as f64);
        let b = a.scale(10.0);
        let c = concat_time(&[&a, &b]).unwrap();
        assert_eq!(c.dims(), (4, 2, 1));
        assert_eq!(c.get(2, 1, 0), 10.0);
    }
}
