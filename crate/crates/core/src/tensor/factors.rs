use super::dense::Tensor3;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Rank-`R` CP model `Σ_r a_r ∘ b_r ∘ c_r` with factor matrices
/// `A (T×R)`, `B (F×R)` and `C (K×R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpFactors<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
}

impl<T: Scalar> CpFactors<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>) -> Result<Self> {
        let r = a.cols();
        if r == 0 || b.cols() != r || c.cols() != r {
            return Err(Error::dims(format!(
                "factor matrices need one shared nonzero column count, got {}, {}, {}",
                a.cols(),
                b.cols(),
                c.cols()
            )));
        }
        Ok(Self { a, b, c })
    }

    pub fn rank(&self) -> usize {
        self.a.cols()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.rows(), self.b.rows(), self.c.rows())
    }

    /// Dense tensor `Σ_r a_r ∘ b_r ∘ c_r`.
    pub fn reconstruct(&self) -> Tensor3<T> {
        let (nt, nf, nk) = self.dims();
        let r = self.rank();
        let mut out = Vec::with_capacity(nt * nf * nk);
        let mut w = vec![T::zero(); r];
        for t in 0..nt {
            let at = self.a.row(t);
            for f in 0..nf {
                for (wj, (&x, &y)) in w.iter_mut().zip(at.iter().zip(self.b.row(f))) {
                    *wj = x * y;
                }
                for k in 0..nk {
                    out.push(w.iter().zip(self.c.row(k)).map(|(&x, &y)| x * y).sum());
                }
            }
        }
        Tensor3::new((nt, nf, nk), out).expect("reconstruction has consistent dims")
    }

    /// Removes the scale and sign ambiguity: columns of `A` and `B` get unit
    /// norm with their largest-magnitude entry positive, the scale moves into
    /// `C`, and components are ordered by decreasing weight `‖c_r‖`.
    pub fn canonicalize(&mut self) {
        let r = self.rank();
        for j in 0..r {
            let mut gain = T::one();
            for m in [&mut self.a, &mut self.b] {
                let mut col = m.column(j);
                let norm = col.iter().map(|&v| v * v).sum::<T>().sqrt();
                if norm == T::zero() {
                    continue;
                }
                let peak = col.iter().copied().fold(T::zero(), |p, v| if v.abs() > p.abs() { v } else { p });
                let s = if peak < T::zero() { -norm } else { norm };
                col.iter_mut().for_each(|v| *v /= s);
                m.set_column(j, &col);
                gain *= s;
            }
            let col: Vec<T> = self.c.column(j).into_iter().map(|v| v * gain).collect();
            self.c.set_column(j, &col);
        }
        let weights = self.weights();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&i, &j| weights[j].partial_cmp(&weights[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
        if order.iter().enumerate().any(|(i, &o)| i != o) {
            let permute = |m: &Matrix<T>| Matrix::from_fn(m.rows(), r, |i, j| m[(i, order[j])]);
            self.a = permute(&self.a);
            self.b = permute(&self.b);
            self.c = permute(&self.c);
        }
    }

    /// Component weights `‖a_r‖·‖b_r‖·‖c_r‖`.
    pub fn weights(&self) -> Vec<T> {
        let norm = |m: &Matrix<T>, j: usize| m.column(j).iter().map(|&v| v * v).sum::<T>().sqrt();
        (0..self.rank())
            .map(|j| norm(&self.a, j) * norm(&self.b, j) * norm(&self.c, j))
            .collect()
    }

    pub fn convert<U: Scalar>(&self) -> CpFactors<U> {
        let cv = |m: &Matrix<T>| m.map_into(|v| U::c(v.as_f64()));
        CpFactors {
            a: cv(&self.a),
            b: cv(&self.b),
            c: cv(&self.c),
        }
    }
}

/// `‖X − X̂‖_F / ‖X‖_F`.
pub fn normalized_error<T: Scalar>(x: &Tensor3<T>, factors: &CpFactors<T>) -> Result<T> {
    if x.dims() != factors.dims() {
        return Err(Error::dims(format!(
            "tensor is {:?} but factors describe {:?}",
            x.dims(),
            factors.dims()
        )));
    }
    let norm = x.frobenius_norm();
    if norm == T::zero() {
        return Err(Error::ZeroTensor);
    }
    let recon = factors.reconstruct();
    let diff = x
        .as_slice()
        .iter()
        .zip(recon.as_slice())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt();
    Ok(diff / norm)
}
