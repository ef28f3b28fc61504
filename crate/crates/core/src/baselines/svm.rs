use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmOptions {
    pub epochs: usize,
    pub lr: f64,
    pub reg: f64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.1,
            reg: 1e-3,
        }
    }
}

/// Linear classifier on standardized features. A positive score predicts
/// `labels[1]`, anything else `labels[0]` (the lower label).
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub feature_mean: Vec<T>,
    pub feature_scale: Vec<T>,
    pub labels: [usize; 2],
    pub reg: T,
}

impl<T: Scalar> SvmModel<T> {
    fn standardize(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.feature_mean.iter().zip(&self.feature_scale))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    fn score_std(&self, z: &[T]) -> T {
        self.weights.iter().zip(z).map(|(&w, &v)| w * v).sum::<T>() + self.bias
    }

    pub fn score(&self, x: &[T]) -> T {
        self.score_std(&self.standardize(x))
    }
}

/// Full-batch subgradient descent on the L2-regularized hinge loss
/// `reg/2·‖w‖² + mean(max(0, 1 − y·(w·x + b)))`, with step `lr/√(epoch+1)`.
/// The iterate with the lowest training objective is returned, so the result
/// is never worse than the all-zero starting model.
pub fn svm_train<T: Scalar>(train: &[FeatureVector<T>], opts: &SvmOptions) -> Result<SvmModel<T>> {
    let first = train.first().ok_or_else(|| Error::invalid("SVM needs training data"))?;
    let d = first.values.len();
    if train.iter().any(|f| f.values.len() != d) {
        return Err(Error::dims("training vectors differ in length"));
    }
    let mut labels: Vec<usize> = train.iter().map(|f| f.label).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != 2 {
        return Err(Error::invalid(format!(
            "linear SVM needs exactly two classes, got {}",
            labels.len()
        )));
    }
    if !(opts.lr > 0.0) || !(opts.reg >= 0.0) {
        return Err(Error::invalid("SVM needs lr > 0 and reg >= 0"));
    }
    let n = T::from_usize_lossy(train.len());
    let mean: Vec<T> = (0..d).map(|j| train.iter().map(|f| f.values[j]).sum::<T>() / n).collect();
    let scale: Vec<T> = (0..d)
        .map(|j| {
            let var = train.iter().map(|f| (f.values[j] - mean[j]).powi(2)).sum::<T>() / n;
            let s = var.sqrt();
            if s > T::zero() {
                s
            } else {
                T::one()
            }
        })
        .collect();
    let mut model = SvmModel {
        weights: vec![T::zero(); d],
        bias: T::zero(),
        feature_mean: mean,
        feature_scale: scale,
        labels: [labels[0], labels[1]],
        reg: T::c(opts.reg),
    };
    let data: Vec<(Vec<T>, T)> = train
        .iter()
        .map(|f| {
            let y = if f.label == labels[1] { T::one() } else { -T::one() };
            (model.standardize(&f.values), y)
        })
        .collect();

    let objective = |m: &SvmModel<T>| std_objective(m, &data);
    let mut best = model.clone();
    let mut best_obj = objective(&model);
    for epoch in 0..opts.epochs {
        let mut gw: Vec<T> = model.weights.iter().map(|&w| model.reg * w).collect();
        let mut gb = T::zero();
        for (z, y) in &data {
            if *y * model.score_std(z) < T::one() {
                gw.iter_mut().zip(z).for_each(|(g, &v)| *g -= *y * v / n);
                gb -= *y / n;
            }
        }
        let step = T::c(opts.lr / ((epoch + 1) as f64).sqrt());
        model.weights.iter_mut().zip(&gw).for_each(|(w, &g)| *w -= step * g);
        model.bias -= step * gb;
        let obj = objective(&model);
        if obj < best_obj {
            best_obj = obj;
            best = model.clone();
        }
    }
    Ok(best)
}

fn std_objective<T: Scalar>(m: &SvmModel<T>, data: &[(Vec<T>, T)]) -> T {
    let n = T::from_usize_lossy(data.len());
    let hinge = data
        .iter()
        .map(|(z, y)| (T::one() - *y * m.score_std(z)).max(T::zero()))
        .sum::<T>()
        / n;
    let norm2 = m.weights.iter().map(|&w| w * w).sum::<T>();
    T::c(0.5) * m.reg * norm2 + hinge
}

/// Training objective of `model` on `data`, in the model's standardized space.
pub fn svm_objective<T: Scalar>(model: &SvmModel<T>, data: &[FeatureVector<T>]) -> T {
    let prepared: Vec<(Vec<T>, T)> = data
        .iter()
        .map(|f| {
            let y = if f.label == model.labels[1] { T::one() } else { -T::one() };
            (model.standardize(&f.values), y)
        })
        .collect();
    std_objective(model, &prepared)
}

pub fn svm_predict<T: Scalar>(model: &SvmModel<T>, query: &[T]) -> Result<usize> {
    if query.len() != model.weights.len() {
        return Err(Error::dims(format!(
            "SVM expects {} features, got {}",
            model.weights.len(),
            query.len()
        )));
    }
    Ok(if model.score(query) > T::zero() {
        model.labels[1]
    } else {
        model.labels[0]
    })
}
