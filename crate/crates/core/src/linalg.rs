//! Small dense factorizations: Cholesky, Householder QR and the cyclic
//! Jacobi eigensolver. Sizes here are tiny (R×R Gram matrices, K×R factor
//! matrices, PCA covariances), so clarity wins over blocking.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Lower-triangular `L` with `L·Lᵀ = a`.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::dims("cholesky of a non-square matrix"));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L·Lᵀ·x = b` in place given the Cholesky factor `L`.
pub fn cholesky_solve_in_place<T: Scalar>(l: &Matrix<T>, b: &mut [T]) {
    let n = l.rows();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves `X·G = M` for `X` with `G` symmetric positive definite.
///
/// When `G` is numerically singular the system is regularized with a ridge of
/// `1e-12·trace(G)` on the diagonal; the returned flag reports whether that
/// happened.
pub fn solve_spd_right<T: Scalar>(m: &Matrix<T>, g: &Matrix<T>) -> Result<(Matrix<T>, bool)> {
    if g.rows() != g.cols() || m.cols() != g.rows() {
        return Err(Error::dims(format!(
            "cannot solve X·G = M with G {}x{} and M {}x{}",
            g.rows(),
            g.cols(),
            m.rows(),
            m.cols()
        )));
    }
    let (l, ridged) = match cholesky(g) {
        Ok(l) if !is_near_singular(&l) => (l, false),
        _ => {
            let mut reg = g.clone();
            let mut ridge = T::c(1e-12) * g.trace();
            if !(ridge > T::zero()) {
                ridge = T::min_positive_value().sqrt();
            }
            for i in 0..reg.rows() {
                reg[(i, i)] += ridge;
            }
            (cholesky(&reg)?, true)
        }
    };
    let mut x = m.clone();
    for r in 0..x.rows() {
        cholesky_solve_in_place(&l, x.row_mut(r));
    }
    Ok((x, ridged))
}

fn is_near_singular<T: Scalar>(l: &Matrix<T>) -> bool {
    let diag: Vec<T> = (0..l.rows()).map(|i| l[(i, i)]).collect();
    let max = diag.iter().copied().fold(T::zero(), T::max);
    let min = diag.iter().copied().fold(T::infinity(), T::min);
    // cond(G) ≈ (max/min)² of the Cholesky diagonal
    min <= max * T::epsilon().sqrt() * T::c(1e-2)
}

/// Thin Householder QR of a tall matrix (`rows ≥ cols`): returns `Q` with
/// orthonormal columns and upper-triangular `R`.
pub fn householder_qr<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::dims("householder QR needs rows >= cols"));
    }
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<T> = (j..m).map(|i| r[(i, j)]).collect();
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm == T::zero() {
            reflectors.push(vec![T::zero(); m - j]);
            continue;
        }
        let alpha = if v[0] >= T::zero() { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        for c in j..n {
            let dot: T = (j..m).map(|i| v[i - j] * r[(i, c)]).sum();
            for i in j..m {
                r[(i, c)] -= T::c(2.0) * v[i - j] * dot;
            }
        }
        reflectors.push(v);
    }
    let mut q = Matrix::zeros(m, n);
    for c in 0..n {
        let mut e = vec![T::zero(); m];
        e[c] = T::one();
        for j in (0..n).rev() {
            let v = &reflectors[j];
            let dot: T = (j..m).map(|i| v[i - j] * e[i]).sum();
            for i in j..m {
                e[i] -= T::c(2.0) * v[i - j] * dot;
            }
        }
        q.set_column(c, &e);
    }
    let r = Matrix::from_fn(n, n, |i, j| if j >= i { r[(i, j)] } else { T::zero() });
    Ok((q, r))
}

/// Inverse of an upper-triangular matrix.
pub fn upper_triangular_inverse<T: Scalar>(r: &Matrix<T>) -> Result<Matrix<T>> {
    let n = r.rows();
    let mut inv = Matrix::zeros(n, n);
    for c in 0..n {
        for i in (0..=c).rev() {
            let rhs = if i == c { T::one() } else { T::zero() };
            let mut s = rhs;
            for k in i + 1..=c {
                s -= r[(i, k)] * inv[(k, c)];
            }
            if r[(i, i)] == T::zero() {
                return Err(Error::NotPositiveDefinite);
            }
            inv[(i, c)] = s / r[(i, i)];
        }
    }
    Ok(inv)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as the columns of the second matrix.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::dims("eigen-decomposition of a non-square matrix"));
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<T>()
            .sqrt();
        if off <= T::epsilon() * scale * T::c(1e-2) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::c(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// 2-norm condition number of a tall matrix, from the eigenvalues of its Gram
/// matrix. Infinite when the matrix is rank deficient.
pub fn condition_number<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let (values, _) = symmetric_eigen(&a.gram())?;
    let max = values.first().copied().unwrap_or(T::zero());
    let min = values.last().copied().unwrap_or(T::zero());
    if !(min > T::zero()) {
        return Ok(T::infinity());
    }
    Ok((max / min).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> Matrix<f64> {
        Matrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = spd();
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn solve_right_matches_product() {
        let g = spd();
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.0, 3.0, 1.0]]).unwrap();
        let m = x.matmul(&g).unwrap();
        let (solved, ridged) = solve_spd_right(&m, &g).unwrap();
        assert!(!ridged);
        assert!(solved.max_abs_diff(&x) < 1e-13);
    }

    #[test]
    fn singular_gram_gets_ridge() {
        let g = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let m = Matrix::from_rows(&[vec![2.0, 2.0]]).unwrap();
        let (_, ridged) = solve_spd_right(&m, &g).unwrap();
        assert!(ridged);
    }

    #[test]
    fn qr_is_orthonormal_and_reconstructs() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![3.0, -1.0],
            vec![0.5, 4.0],
            vec![-2.0, 1.0],
        ])
        .unwrap();
        let (q, r) = householder_qr(&a).unwrap();
        assert!(q.gram().max_abs_diff(&Matrix::identity(2)) < 1e-14);
        assert!(q.matmul(&r).unwrap().max_abs_diff(&a) < 1e-13);
        let ri = upper_triangular_inverse(&r).unwrap();
        assert!(r.matmul(&ri).unwrap().max_abs_diff(&Matrix::identity(2)) < 1e-14);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = spd();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = Matrix::from_fn(3, 3, |i, j| if i == j { vals[i] } else { 0.0 });
        let back = vecs.matmul(&d).unwrap().matmul(&vecs.transpose()).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-13);
        assert!(vecs.gram().max_abs_diff(&Matrix::identity(3)) < 1e-13);
    }

    #[test]
    fn condition_of_scaled_identity() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-3], vec![0.0, 0.0]]).unwrap();
        let c: f64 = condition_number(&a).unwrap();
        assert!((c - 1e3).abs() < 1e-6);
    }
}
