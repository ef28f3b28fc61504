use super::dense::{mode_n_product, Mode, Tensor3};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, householder_qr, upper_triangular_inverse};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Largest accepted condition number of the channel factor `C`.
pub const CONDITION_CAP: f64 = 1e8;

/// Left inverse `P = (CᵀC)⁻¹Cᵀ` of a channel factor, `R × K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector<T> {
    matrix: Matrix<T>,
}

impl<T: Scalar> Projector<T> {
    /// Wraps an arbitrary `R × K` weighting matrix.
    pub fn from_matrix(matrix: Matrix<T>) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::invalid("projector must be non-empty"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_channels(&self) -> usize {
        self.matrix.cols()
    }
}

/// Computes the projector from a thin QR factorization, `P = R⁻¹Qᵀ`, after
/// checking `cond(C)` against [`CONDITION_CAP`].
pub fn build_projector<T: Scalar>(c: &Matrix<T>) -> Result<Projector<T>> {
    let (k, r) = c.shape();
    if r == 0 {
        return Err(Error::invalid("channel factor has no columns"));
    }
    if k < r {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
            cap: CONDITION_CAP,
        });
    }
    let cond = condition_number(c)?.as_f64();
    if !(cond <= CONDITION_CAP) {
        return Err(Error::IllConditioned {
            condition: cond,
            cap: CONDITION_CAP,
        });
    }
    let (q, rr) = householder_qr(c)?;
    let rinv = upper_triangular_inverse(&rr)?;
    Ok(Projector {
        matrix: rinv.matmul(&q.transpose())?,
    })
}

/// `X ×₃ P`: super-slice `r` is the `P[r][k]`-weighted sum of channel slices.
pub fn super_slices<T: Scalar>(x: &Tensor3<T>, p: &Projector<T>) -> Result<Tensor3<T>> {
    mode_n_product(x, p.matrix(), Mode::Three)
}
