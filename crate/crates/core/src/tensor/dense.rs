use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::tfr::TfImage;

/// Dense `T × F × K` tensor stored in `[t][f][k]` order, `k` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T> {
    dims: (usize, usize, usize),
    data: Vec<T>,
}

/// Tensor mode, numbered as in `X ×ₙ U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            _ => Err(Error::invalid(format!("tensor mode must be 1, 2 or 3, got {n}"))),
        }
    }
}

impl<T: Scalar> Tensor3<T> {
    pub fn new(dims: (usize, usize, usize), data: Vec<T>) -> Result<Self> {
        let len = dims.0 * dims.1 * dims.2;
        if data.len() != len {
            return Err(Error::dims(format!(
                "tensor {:?} needs {len} entries, got {}",
                dims,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tensor entries must be finite"));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            dims,
            data: vec![T::zero(); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for t in 0..dims.0 {
            for fr in 0..dims.1 {
                for k in 0..dims.2 {
                    data.push(f(t, fr, k));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    fn offset(&self, t: usize, f: usize, k: usize) -> usize {
        (t * self.dims.1 + f) * self.dims.2 + k
    }

    #[inline]
    pub fn get(&self, t: usize, f: usize, k: usize) -> T {
        self.data[self.offset(t, f, k)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, f: usize, k: usize, v: T) {
        let o = self.offset(t, f, k);
        self.data[o] = v;
    }

    /// Mode-3 fiber `X[t, f, :]`.
    #[inline]
    pub fn channel_fiber(&self, t: usize, f: usize) -> &[T] {
        let o = self.offset(t, f, 0);
        &self.data[o..o + self.dims.2]
    }

    /// Frontal slice `X[:, :, k]` as a `T × F` matrix.
    pub fn slice(&self, k: usize) -> Matrix<T> {
        Matrix::from_fn(self.dims.0, self.dims.1, |t, f| self.get(t, f, k))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::dims("adding tensors of different shapes"));
        }
        Ok(Self {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.dims != other.dims {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn dim(&self, mode: Mode) -> usize {
        match mode {
            Mode::One => self.dims.0,
            Mode::Two => self.dims.1,
            Mode::Three => self.dims.2,
        }
    }
}

/// Stacks `K` equally sized images as the frontal slices of a tensor.
pub fn stack_images<T: Scalar>(images: &[TfImage<T>]) -> Result<Tensor3<T>> {
    let first = images.first().ok_or_else(|| Error::invalid("no images to stack"))?;
    let (t, f) = first.dims();
    if let Some((i, img)) = images.iter().enumerate().find(|(_, img)| img.dims() != (t, f)) {
        return Err(Error::dims(format!(
            "image {i} is {}x{}, expected {t}x{f}",
            img.dims().0,
            img.dims().1
        )));
    }
    let k = images.len();
    Ok(Tensor3::from_fn((t, f, k), |ti, fi, ki| images[ki].values[(ti, fi)]))
}

/// Matricization whose columns are the mode-`n` fibers.
///
/// Column ordering (0-based): mode 1 puts `X[t,f,k]` at `(t, f + F·k)`, mode 2
/// at `(f, t + T·k)`, mode 3 at `(k, t + T·f)`.
pub fn unfold<T: Scalar>(x: &Tensor3<T>, mode: Mode) -> Matrix<T> {
    let (nt, nf, nk) = x.dims();
    match mode {
        Mode::One => Matrix::from_fn(nt, nf * nk, |t, c| x.get(t, c % nf, c / nf)),
        Mode::Two => Matrix::from_fn(nf, nt * nk, |f, c| x.get(c % nt, f, c / nt)),
        Mode::Three => Matrix::from_fn(nk, nt * nf, |k, c| x.get(c % nt, c / nt, k)),
    }
}

/// Inverse of [`unfold`].
pub fn fold<T: Scalar>(m: &Matrix<T>, mode: Mode, dims: (usize, usize, usize)) -> Result<Tensor3<T>> {
    let (nt, nf, nk) = dims;
    let expected = match mode {
        Mode::One => (nt, nf * nk),
        Mode::Two => (nf, nt * nk),
        Mode::Three => (nk, nt * nf),
    };
    if m.shape() != expected {
        return Err(Error::dims(format!(
            "cannot fold a {}x{} matrix along {mode:?} into {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(Tensor3::from_fn(dims, |t, f, k| match mode {
        Mode::One => m[(t, f + nf * k)],
        Mode::Two => m[(f, t + nt * k)],
        Mode::Three => m[(k, t + nt * f)],
    }))
}

/// `X ×ₙ M`: every mode-`n` fiber is multiplied by `M`, so that
/// `unfold(Y, n) = M · unfold(X, n)`. A single-row `M` contracts that mode to
/// size one.
pub fn mode_n_product<T: Scalar>(x: &Tensor3<T>, m: &Matrix<T>, mode: Mode) -> Result<Tensor3<T>> {
    let n = x.dim(mode);
    if m.cols() != n {
        return Err(Error::dims(format!(
            "mode-{mode:?} product needs a matrix with {n} columns, got {}",
            m.cols()
        )));
    }
    let (nt, nf, nk) = x.dims();
    let r = m.rows();
    let out = match mode {
        Mode::Three => {
            let mut y = Tensor3::zeros((nt, nf, r));
            for t in 0..nt {
                for f in 0..nf {
                    let fiber = x.channel_fiber(t, f);
                    for j in 0..r {
                        let v = m.row(j).iter().zip(fiber).map(|(&a, &b)| a * b).sum();
                        y.set(t, f, j, v);
                    }
                }
            }
            y
        }
        Mode::One => {
            let mut y = Tensor3::zeros((r, nf, nk));
            let plane = nf * nk;
            for j in 0..r {
                let dst = &mut y.data[j * plane..(j + 1) * plane];
                for (t, &w) in m.row(j).iter().enumerate() {
                    if w == T::zero() {
                        continue;
                    }
                    for (d, &s) in dst.iter_mut().zip(&x.data[t * plane..(t + 1) * plane]) {
                        *d += w * s;
                    }
                }
            }
            y
        }
        Mode::Two => {
            let mut y = Tensor3::zeros((nt, r, nk));
            for t in 0..nt {
                for j in 0..r {
                    for (f, &w) in m.row(j).iter().enumerate() {
                        if w == T::zero() {
                            continue;
                        }
                        let src = (t * nf + f) * nk;
                        let dst = (t * r + j) * nk;
                        for k in 0..nk {
                            let v = x.data[src + k];
                            y.data[dst + k] += w * v;
                        }
                    }
                }
            }
            y
        }
    };
    Ok(out)
}
