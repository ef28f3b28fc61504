//! Single-sample layer kernels on flattened `[channel][row][column]` volumes.

use crate::scalar::Scalar;

/// Zero padding before the first row/column for a same-size output; the
/// remainder goes after (a 2×2 filter pads only after).
#[inline]
pub fn pad_before(filter: usize) -> usize {
    (filter - 1) / 2
}

/// Column range `x` such that `x + shift` stays inside `0..width`.
#[inline]
fn valid_range(shift: isize, width: usize) -> (usize, usize) {
    let lo = (-shift).max(0) as usize;
    let hi = (width as isize - shift).clamp(0, width as isize) as usize;
    (lo, hi.max(lo))
}

/// Same-padded stride-1 cross-correlation. `weights` is
/// `[out][in][fy][fx]`, `bias` has one entry per output map.
pub fn conv2d_same<T: Scalar>(
    input: &[T],
    (c, h, w): (usize, usize, usize),
    weights: &[T],
    bias: &[T],
    filter: usize,
) -> Vec<T> {
    let out_maps = bias.len();
    debug_assert_eq!(weights.len(), out_maps * c * filter * filter);
    let plane = h * w;
    let pb = pad_before(filter) as isize;
    let mut out = vec![T::zero(); out_maps * plane];
    for o in 0..out_maps {
        let dst = &mut out[o * plane..(o + 1) * plane];
        dst.iter_mut().for_each(|v| *v = bias[o]);
        for ci in 0..c {
            let src = &input[ci * plane..(ci + 1) * plane];
            for dy in 0..filter {
                let sy = dy as isize - pb;
                for dx in 0..filter {
                    let sx = dx as isize - pb;
                    let wt = weights[((o * c + ci) * filter + dy) * filter + dx];
                    let (x0, x1) = valid_range(sx, w);
                    let (y0, y1) = valid_range(sy, h);
                    for y in y0..y1 {
                        let iy = (y as isize + sy) as usize;
                        let orow = &mut dst[y * w + x0..y * w + x1];
                        let start = (iy * w) as isize + x0 as isize + sx;
                        let irow = &src[start as usize..start as usize + (x1 - x0)];
                        for (ov, &iv) in orow.iter_mut().zip(irow) {
                            *ov += wt * iv;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Backward pass of [`conv2d_same`]. Accumulates into `dw`, `db` and, when
/// given, `dinput`.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_same_backward<T: Scalar>(
    input: &[T],
    (c, h, w): (usize, usize, usize),
    weights: &[T],
    filter: usize,
    dout: &[T],
    dw: &mut [T],
    db: &mut [T],
    mut dinput: Option<&mut [T]>,
) {
    let out_maps = db.len();
    let plane = h * w;
    let pb = pad_before(filter) as isize;
    for o in 0..out_maps {
        let g = &dout[o * plane..(o + 1) * plane];
        db[o] += g.iter().copied().sum::<T>();
        for ci in 0..c {
            let src = &input[ci * plane..(ci + 1) * plane];
            for dy in 0..filter {
                let sy = dy as isize - pb;
                let (y0, y1) = valid_range(sy, h);
                for dx in 0..filter {
                    let sx = dx as isize - pb;
                    let (x0, x1) = valid_range(sx, w);
                    let widx = ((o * c + ci) * filter + dy) * filter + dx;
                    let wt = weights[widx];
                    let mut acc = T::zero();
                    for y in y0..y1 {
                        let iy = (y as isize + sy) as usize;
                        let grow = &g[y * w + x0..y * w + x1];
                        let start = ((iy * w) as isize + x0 as isize + sx) as usize;
                        let irow = &src[start..start + (x1 - x0)];
                        acc += grow.iter().zip(irow).map(|(&a, &b)| a * b).sum::<T>();
                        if let Some(di) = dinput.as_deref_mut() {
                            let drow = &mut di[ci * plane + start..ci * plane + start + (x1 - x0)];
                            for (d, &gv) in drow.iter_mut().zip(grow) {
                                *d += wt * gv;
                            }
                        }
                    }
                    dw[widx] += acc;
                }
            }
        }
    }
}

pub fn relu<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| v.max(T::zero())).collect()
}

/// 2×2 stride-2 max pooling over each channel; trailing odd rows/columns are
/// dropped. Also returns, per output, the flat input index of the maximum
/// (first in row-major order on ties).
pub fn maxpool2<T: Scalar>(input: &[T], (c, h, w): (usize, usize, usize)) -> (Vec<T>, Vec<usize>) {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut arg = Vec::with_capacity(c * oh * ow);
    for ci in 0..c {
        let base = ci * h * w;
        for y in 0..oh {
            for x in 0..ow {
                let mut best = base + 2 * y * w + 2 * x;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let i = base + (2 * y + dy) * w + 2 * x + dx;
                    if input[i] > input[best] {
                        best = i;
                    }
                }
                out.push(input[best]);
                arg.push(best);
            }
        }
    }
    (out, arg)
}

/// `W x + b` with `W` stored `[out][in]`.
pub fn dense<T: Scalar>(x: &[T], weights: &[T], bias: &[T]) -> Vec<T> {
    let n_in = x.len();
    bias.iter()
        .enumerate()
        .map(|(o, &b)| b + weights[o * n_in..(o + 1) * n_in].iter().zip(x).map(|(&a, &v)| a * v).sum::<T>())
        .collect()
}

/// Accumulates dense-layer gradients and returns the gradient w.r.t. `x`.
pub fn dense_backward<T: Scalar>(x: &[T], weights: &[T], dout: &[T], dw: &mut [T], db: &mut [T]) -> Vec<T> {
    let n_in = x.len();
    let mut dx = vec![T::zero(); n_in];
    for (o, &g) in dout.iter().enumerate() {
        db[o] += g;
        if g == T::zero() {
            continue;
        }
        let row = o * n_in..(o + 1) * n_in;
        for (d, &xv) in dw[row.clone()].iter_mut().zip(x) {
            *d += g * xv;
        }
        for (d, &wv) in dx.iter_mut().zip(&weights[row]) {
            *d += g * wv;
        }
    }
    dx
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_filter_reproduces_input() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut k = vec![0.0; 9];
        k[4] = 1.0;
        let y = conv2d_same(&x, (1, 4, 5), &k, &[0.0], 3);
        assert_eq!(y, x);
    }

    #[test]
    fn two_by_two_ones_sums_windows() {
        let x: Vec<f64> = (1..=9).map(f64::from).collect();
        let y = conv2d_same(&x, (1, 3, 3), &[1.0; 4], &[0.0], 2);
        // valid 2x2 region
        assert_eq!([y[0], y[1], y[3], y[4]], [12.0, 16.0, 24.0, 28.0]);
        // padding after: last column only sees itself and the row below
        assert_eq!(y[2], 3.0 + 6.0);
        assert_eq!(y[8], 9.0);
    }

    #[test]
    fn pool_takes_window_max() {
        let x = vec![1.0, 5.0, 2.0, 0.0, 3.0, 4.0, -1.0, 7.0, 9.0, 9.0, 9.0, 9.0];
        let (p, arg) = maxpool2(&x, (1, 3, 4));
        assert_eq!(p, vec![5.0, 7.0]);
        assert_eq!(arg, vec![1, 7]);
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, 1001.0, 990.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
