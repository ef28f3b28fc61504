use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{loss_gradients_hits, predict, Parameters, TrainedNetwork};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Feature maps per conv block, assigned in ascending order.
    pub feature_maps: Vec<usize>,
    pub fc_neurons: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            momentum: 0.9,
            feature_maps: vec![32, 64],
            fc_neurons: 64,
            batch_size: 40,
            epochs: 19,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("need learning_rate > 0 and momentum in [0, 1)"));
        }
        if self.batch_size == 0 || self.fc_neurons == 0 {
            return Err(Error::invalid("batch_size and fc_neurons must be positive"));
        }
        if self.feature_maps.is_empty() || self.feature_maps.contains(&0) {
            return Err(Error::invalid("feature_maps must be non-empty and positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean mini-batch loss, each batch evaluated before its update.
    pub loss: f64,
    /// Training accuracy from the same forward passes.
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_accuracy: Option<f64>,
}

/// `v ← μ·v − lr·g; θ ← θ + v`.
pub fn sgd_step<T: Scalar>(
    net: &mut TrainedNetwork<T>,
    grads: &Parameters<T>,
    hyper: &Hyperparameters,
    velocity: &mut Parameters<T>,
) -> Result<()> {
    if !net.params.same_shape(grads) || !net.params.same_shape(velocity) {
        return Err(Error::dims("gradient or velocity shapes do not match the network"));
    }
    let mu = T::c(hyper.momentum);
    let lr = T::c(hyper.learning_rate);
    for ((theta, g), v) in net.params.tensors.iter_mut().zip(&grads.tensors).zip(velocity.tensors.iter_mut()) {
        for ((t, &gi), vi) in theta.iter_mut().zip(g).zip(v.iter_mut()) {
            *vi = mu * *vi - lr * gi;
            *t += *vi;
        }
    }
    Ok(())
}

pub fn train<T: Scalar>(
    net: TrainedNetwork<T>,
    data: &[Vec<T>],
    labels: &[usize],
    hyper: &Hyperparameters,
) -> Result<TrainedNetwork<T>> {
    train_monitored(net, data, labels, hyper, None)
}

/// Mini-batch training with a fresh seeded shuffle every epoch; the final
/// short batch is kept. Appends one [`EpochStats`] per epoch, with the
/// accuracy on `validation` when given. The validation set never influences
/// the parameters.
pub fn train_monitored<T: Scalar>(
    mut net: TrainedNetwork<T>,
    data: &[Vec<T>],
    labels: &[usize],
    hyper: &Hyperparameters,
    validation: Option<(&[Vec<T>], &[usize])>,
) -> Result<TrainedNetwork<T>> {
    hyper.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if data.len() != labels.len() {
        return Err(Error::dims(format!("{} samples but {} labels", data.len(), labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut velocity = Parameters::zeros(&net.arch);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let start = net.history.len();
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut hits = 0;
        for idx in order.chunks(hyper.batch_size) {
            let xs: Vec<Vec<T>> = idx.iter().map(|&i| data[i].clone()).collect();
            let ys: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (loss, grads, h) = loss_gradients_hits(&net, &xs, &ys)?;
            loss_sum += loss.as_f64() * idx.len() as f64;
            hits += h;
            sgd_step(&mut net, &grads, hyper, &mut velocity)?;
        }
        let val_accuracy = match validation {
            Some((vx, vy)) if !vx.is_empty() => {
                let pred = predict(&net, vx)?;
                Some(pred.iter().zip(vy).filter(|(p, y)| p == y).count() as f64 / vx.len() as f64)
            }
            _ => None,
        };
        let n = data.len() as f64;
        net.history.push(EpochStats {
            epoch: start + epoch,
            loss: loss_sum / n,
            accuracy: hits as f64 / n,
            val_accuracy,
        });
    }
    Ok(net)
}
