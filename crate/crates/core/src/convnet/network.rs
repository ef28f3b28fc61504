use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::arch::Architecture;
use super::layers::{conv2d_same, conv2d_same_backward, dense, dense_backward, maxpool2, relu, softmax};
use super::train::EpochStats;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Samples per gradient work unit. Fixed so that the reduction order, and
/// hence every bit of the result, is independent of the thread count.
const GRAD_CHUNK: usize = 8;

/// Flat parameter tensors in layer order: for each conv block its weights
/// `[out][in][fy][fx]` then bias, followed by hidden dense weights
/// `[hidden][in]`, hidden bias, output weights `[class][hidden]`, output bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters<T> {
    pub tensors: Vec<Vec<T>>,
}

impl<T: Scalar> Parameters<T> {
    pub fn zeros(arch: &Architecture) -> Self {
        Self {
            tensors: Self::sizes(arch).into_iter().map(|n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn sizes(arch: &Architecture) -> Vec<usize> {
        let shapes = arch.shapes();
        let mut out = Vec::new();
        for (b, &(c, _, _)) in arch.blocks.iter().zip(&shapes) {
            out.push(b.out_maps * c * b.filter * b.filter);
            out.push(b.out_maps);
        }
        out.push(arch.fc_neurons * arch.fc_input_len());
        out.push(arch.fc_neurons);
        out.push(arch.n_classes * arch.fc_neurons);
        out.push(arch.n_classes);
        out
    }

    pub fn len(&self) -> usize {
        self.tensors.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
    }

    fn scale(&mut self, s: T) {
        self.tensors.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.tensors.len() == other.tensors.len()
            && self.tensors.iter().zip(&other.tensors).all(|(a, b)| a.len() == b.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedNetwork<T> {
    pub arch: Architecture,
    pub params: Parameters<T>,
    pub history: Vec<EpochStats>,
}

/// He-normal weights (`std = √(2 / fan_in)`), zero biases.
pub fn init_network<T: Scalar>(arch: &Architecture, seed: u64) -> Result<TrainedNetwork<T>> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Parameters::zeros(arch);
    let shapes = arch.shapes();
    let mut fan_ins: Vec<usize> = arch
        .blocks
        .iter()
        .zip(&shapes)
        .map(|(b, &(c, _, _))| c * b.filter * b.filter)
        .collect();
    fan_ins.push(arch.fc_input_len());
    fan_ins.push(arch.fc_neurons);
    for (i, fan_in) in fan_ins.into_iter().enumerate() {
        let std = (2.0 / fan_in as f64).sqrt();
        for w in params.tensors[2 * i].iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *w = T::c(std * z);
        }
    }
    Ok(TrainedNetwork {
        arch: arch.clone(),
        params,
        history: Vec::new(),
    })
}

struct Trace<T> {
    block_inputs: Vec<Vec<T>>,
    pre_relu: Vec<Vec<T>>,
    pool_arg: Vec<Option<Vec<usize>>>,
    flat: Vec<T>,
    hidden_pre: Vec<T>,
    hidden: Vec<T>,
    probs: Vec<T>,
}

fn forward_sample<T: Scalar>(arch: &Architecture, params: &Parameters<T>, x: &[T]) -> Trace<T> {
    let shapes = arch.shapes();
    let nb = arch.blocks.len();
    let mut trace = Trace {
        block_inputs: Vec::with_capacity(nb),
        pre_relu: Vec::with_capacity(nb),
        pool_arg: Vec::with_capacity(nb),
        flat: Vec::new(),
        hidden_pre: Vec::new(),
        hidden: Vec::new(),
        probs: Vec::new(),
    };
    let mut vol = x.to_vec();
    for (i, b) in arch.blocks.iter().enumerate() {
        let (c, h, w) = shapes[i];
        let pre = conv2d_same(&vol, (c, h, w), &params.tensors[2 * i], &params.tensors[2 * i + 1], b.filter);
        let act = relu(&pre);
        let (next, arg) = if b.pool {
            let (p, a) = maxpool2(&act, (b.out_maps, h, w));
            (p, Some(a))
        } else {
            (act, None)
        };
        trace.block_inputs.push(std::mem::replace(&mut vol, next));
        trace.pre_relu.push(pre);
        trace.pool_arg.push(arg);
    }
    let p = &params.tensors;
    trace.hidden_pre = dense(&vol, &p[2 * nb], &p[2 * nb + 1]);
    trace.hidden = relu(&trace.hidden_pre);
    let logits = dense(&trace.hidden, &p[2 * nb + 2], &p[2 * nb + 3]);
    trace.probs = softmax(&logits);
    trace.flat = vol;
    trace
}

fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = j;
        }
    }
    best
}

/// Adds this sample's (unscaled) gradients to `grads`; returns its loss and
/// whether the forward pass predicted `label`.
fn backward_sample<T: Scalar>(
    arch: &Architecture,
    params: &Parameters<T>,
    trace: Trace<T>,
    label: usize,
    grads: &mut Parameters<T>,
) -> (T, bool) {
    let nb = arch.blocks.len();
    let shapes = arch.shapes();
    let loss = -trace.probs[label].max(T::min_positive_value()).ln();
    let hit = argmax(&trace.probs) == label;
    let mut dlogits = trace.probs;
    dlogits[label] -= T::one();

    let p = &params.tensors;
    let (head, rest) = grads.tensors.split_at_mut(2 * nb + 2);
    let (fc2_w, fc2_b) = rest.split_at_mut(1);
    let mut dhidden = dense_backward(&trace.hidden, &p[2 * nb + 2], &dlogits, &mut fc2_w[0], &mut fc2_b[0]);
    dhidden
        .iter_mut()
        .zip(&trace.hidden_pre)
        .for_each(|(d, &z)| if z <= T::zero() { *d = T::zero() });
    let (conv_grads, fc1) = head.split_at_mut(2 * nb);
    let (fc1_w, fc1_b) = fc1.split_at_mut(1);
    let mut dvol = dense_backward(&trace.flat, &p[2 * nb], &dhidden, &mut fc1_w[0], &mut fc1_b[0]);

    for i in (0..nb).rev() {
        let b = &arch.blocks[i];
        let (c, h, w) = shapes[i];
        let pre = &trace.pre_relu[i];
        let mut dpre = match &trace.pool_arg[i] {
            Some(arg) => {
                let mut d = vec![T::zero(); pre.len()];
                for (&a, &g) in arg.iter().zip(&dvol) {
                    d[a] += g;
                }
                d
            }
            None => dvol,
        };
        dpre.iter_mut().zip(pre).for_each(|(d, &z)| if z <= T::zero() { *d = T::zero() });
        let (gw, gb) = conv_grads[2 * i..2 * i + 2].split_at_mut(1);
        let mut dinput = if i > 0 { vec![T::zero(); c * h * w] } else { Vec::new() };
        conv2d_same_backward(
            &trace.block_inputs[i],
            (c, h, w),
            &p[2 * i],
            b.filter,
            &dpre,
            &mut gw[0],
            &mut gb[0],
            if i > 0 { Some(&mut dinput) } else { None },
        );
        dvol = dinput;
    }
    (loss, hit)
}

fn check_batch<T: Scalar>(arch: &Architecture, batch: &[Vec<T>]) -> Result<()> {
    let n = arch.input_len();
    if let Some((i, x)) = batch.iter().enumerate().find(|(_, x)| x.len() != n) {
        return Err(Error::dims(format!(
            "sample {i} has {} values, network expects {:?} = {n}",
            x.len(),
            arch.input
        )));
    }
    Ok(())
}

/// Class probabilities, one row per sample.
pub fn forward<T: Scalar>(net: &TrainedNetwork<T>, batch: &[Vec<T>]) -> Result<Matrix<T>> {
    check_batch(&net.arch, batch)?;
    let rows: Vec<Vec<T>> = batch
        .par_iter()
        .map(|x| forward_sample(&net.arch, &net.params, x).probs)
        .collect();
    let c = net.arch.n_classes;
    Matrix::new(batch.len(), c, rows.into_iter().flatten().collect())
}

/// Mean cross-entropy over the batch and its gradient for every parameter.
pub fn loss_and_gradients<T: Scalar>(
    net: &TrainedNetwork<T>,
    batch: &[Vec<T>],
    labels: &[usize],
) -> Result<(T, Parameters<T>)> {
    let (loss, grads, _) = loss_gradients_hits(net, batch, labels)?;
    Ok((loss, grads))
}

/// As [`loss_and_gradients`], also counting correct forward predictions.
pub(crate) fn loss_gradients_hits<T: Scalar>(
    net: &TrainedNetwork<T>,
    batch: &[Vec<T>],
    labels: &[usize],
) -> Result<(T, Parameters<T>, usize)> {
    check_batch(&net.arch, batch)?;
    if batch.len() != labels.len() || batch.is_empty() {
        return Err(Error::dims(format!(
            "{} samples but {} labels",
            batch.len(),
            labels.len()
        )));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= net.arch.n_classes) {
        return Err(Error::invalid(format!("label {l} outside 0..{}", net.arch.n_classes)));
    }
    let partials: Vec<(T, Parameters<T>, usize)> = batch
        .par_chunks(GRAD_CHUNK)
        .zip(labels.par_chunks(GRAD_CHUNK))
        .map(|(xs, ls)| {
            let mut g = Parameters::zeros(&net.arch);
            let mut loss = T::zero();
            let mut hits = 0;
            for (x, &l) in xs.iter().zip(ls) {
                let trace = forward_sample(&net.arch, &net.params, x);
                let (sample_loss, hit) = backward_sample(&net.arch, &net.params, trace, l, &mut g);
                loss += sample_loss;
                hits += usize::from(hit);
            }
            (loss, g, hits)
        })
        .collect();
    let mut iter = partials.into_iter();
    let (mut loss, mut grads, mut hits) = iter.next().expect("non-empty batch");
    for (l, g, h) in iter {
        loss += l;
        hits += h;
        grads.add_assign(&g);
    }
    let inv = T::one() / T::from_usize_lossy(batch.len());
    grads.scale(inv);
    Ok((loss * inv, grads, hits))
}

/// Most probable class per sample; ties go to the lower class id.
pub fn predict<T: Scalar>(net: &TrainedNetwork<T>, batch: &[Vec<T>]) -> Result<Vec<usize>> {
    let probs = forward(net, batch)?;
    Ok((0..probs.rows()).map(|i| argmax(probs.row(i))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Architecture {
        Architecture::with_layer_count(6, (2, 4, 4), 3, &[2], 8, 2).unwrap()
    }

    #[test]
    fn init_is_seeded_with_zero_biases() {
        let a = init_network::<f64>(&tiny(), 1).unwrap();
        let b = init_network::<f64>(&tiny(), 1).unwrap();
        let c = init_network::<f64>(&tiny(), 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
        for i in (1..a.params.tensors.len()).step_by(2) {
            assert!(a.params.tensors[i].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zeroed_output_layer_gives_ln2_and_class_zero() {
        let mut net = init_network::<f64>(&tiny(), 3).unwrap();
        let n = net.params.tensors.len();
        net.params.tensors[n - 2].iter_mut().for_each(|v| *v = 0.0);
        let x = vec![(0..32).map(|i| i as f64 / 10.0).collect::<Vec<_>>(); 3];
        let (loss, _) = loss_and_gradients(&net, &x, &[0, 1, 1]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-10);
        assert_eq!(predict(&net, &x).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn shape_errors() {
        let net = init_network::<f64>(&tiny(), 3).unwrap();
        assert!(forward(&net, &[vec![0.0; 31]]).is_err());
        assert!(loss_and_gradients(&net, &[vec![0.0; 32]], &[2]).is_err());
        assert!(loss_and_gradients(&net, &[vec![0.0; 32]], &[0, 1]).is_err());
    }
}
