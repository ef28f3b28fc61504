use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel<T> {
    pub mean: Vec<T>,
    /// `n_components × D`, orthonormal rows.
    pub components: Matrix<T>,
    pub explained_variance_ratio: Vec<T>,
}

impl<T: Scalar> PcaModel<T> {
    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// How many components to keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaSelection {
    Count(usize),
    /// Smallest count whose cumulative explained ratio reaches the fraction.
    Variance(f64),
}

impl Default for PcaSelection {
    fn default() -> Self {
        PcaSelection::Count(15)
    }
}

impl PcaSelection {
    pub fn fit<T: Scalar>(&self, rows: &Matrix<T>) -> Result<PcaModel<T>> {
        match *self {
            PcaSelection::Count(n) => pca_fit(rows, n),
            PcaSelection::Variance(f) => pca_fit_variance(rows, f),
        }
    }
}

pub fn pca_fit<T: Scalar>(rows: &Matrix<T>, n_components: usize) -> Result<PcaModel<T>> {
    let (n, d) = rows.shape();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    if n_components == 0 || n_components > n.min(d) {
        return Err(Error::invalid(format!(
            "n_components must be in 1..={}, got {n_components}",
            n.min(d)
        )));
    }
    let (mean, values, basis) = full_basis(rows)?;
    let total: T = values.iter().copied().sum();
    let ratios = values[..n_components]
        .iter()
        .map(|&v| if total > T::zero() { v / total } else { T::zero() })
        .collect();
    let components = Matrix::from_fn(n_components, d, |i, j| basis[(i, j)]);
    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio: ratios,
    })
}

/// Keeps the fewest components explaining at least `fraction` of the variance.
pub fn pca_fit_variance<T: Scalar>(rows: &Matrix<T>, fraction: f64) -> Result<PcaModel<T>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("variance fraction must be in (0, 1]"));
    }
    let max = rows.rows().min(rows.cols());
    let full = pca_fit(rows, max)?;
    let mut acc = 0.0;
    let mut keep = max;
    for (i, r) in full.explained_variance_ratio.iter().enumerate() {
        acc += r.as_f64();
        if acc >= fraction - 1e-12 {
            keep = i + 1;
            break;
        }
    }
    Ok(PcaModel {
        mean: full.mean,
        components: Matrix::from_fn(keep, rows.cols(), |i, j| full.components[(i, j)]),
        explained_variance_ratio: full.explained_variance_ratio[..keep].to_vec(),
    })
}

/// Column means, variances along the principal axes (descending, length
/// `min(N, D)`), and a `min(N, D) × D` orthonormal basis of principal axes.
fn full_basis<T: Scalar>(rows: &Matrix<T>) -> Result<(Vec<T>, Vec<T>, Matrix<T>)> {
    let (n, d) = rows.shape();
    let nt = T::from_usize_lossy(n);
    let mean: Vec<T> = (0..d).map(|j| (0..n).map(|i| rows[(i, j)]).sum::<T>() / nt).collect();
    let centered = Matrix::from_fn(n, d, |i, j| rows[(i, j)] - mean[j]);
    let m = n.min(d);
    let denom = T::from_usize_lossy(n - 1);

    let (values, mut axes) = if d <= n {
        let (vals, vecs) = symmetric_eigen(&centered.gram())?;
        (vals, vecs.transpose())
    } else {
        // Gram trick: eigenvectors of X Xᵀ map to principal axes through Xᵀ.
        let (vals, vecs) = symmetric_eigen(&centered.transpose().gram())?;
        let mut axes = Matrix::zeros(n, d);
        for c in 0..n {
            let u = vecs.column(c);
            let v: Vec<T> = (0..d).map(|j| (0..n).map(|i| centered[(i, j)] * u[i]).sum()).collect();
            axes.row_mut(c).copy_from_slice(&v);
        }
        (vals, axes)
    };

    let top = values.first().copied().unwrap_or(T::zero()).max(T::zero());
    let floor = top * T::epsilon() * T::from_usize_lossy(n.max(d)) * T::c(10.0);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut variances = Vec::with_capacity(m);
    for (i, &lam) in values.iter().take(m).enumerate() {
        let row = axes.row_mut(i);
        let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
        if lam > floor && norm > T::zero() {
            row.iter_mut().for_each(|v| *v /= norm);
            basis.push(row.to_vec());
            variances.push(lam / denom);
        }
    }
    complete_orthonormal(&mut basis, d, m);
    variances.resize(m, T::zero());
    for row in &mut basis {
        fix_sign(row);
    }
    let flat = basis.into_iter().flatten().collect();
    Ok((mean, variances, Matrix::new(m, d, flat)?))
}

/// Extends `basis` to `m` orthonormal rows by Gram-Schmidt on unit vectors.
fn complete_orthonormal<T: Scalar>(basis: &mut Vec<Vec<T>>, d: usize, m: usize) {
    let mut e = 0;
    while basis.len() < m && e < d {
        let mut v = vec![T::zero(); d];
        v[e] = T::one();
        e += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let dot: T = b.iter().zip(&v).map(|(&x, &y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, &y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm > T::c(1e-6) {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
}

fn fix_sign<T: Scalar>(row: &mut [T]) {
    let peak = row
        .iter()
        .copied()
        .fold(T::zero(), |p, v| if v.abs() > p.abs() { v } else { p });
    if peak < T::zero() {
        row.iter_mut().for_each(|v| *v = -*v);
    }
}

pub fn pca_transform<T: Scalar>(model: &PcaModel<T>, rows: &Matrix<T>) -> Result<Matrix<T>> {
    if rows.cols() != model.dim() {
        return Err(Error::dims(format!(
            "PCA model expects {} columns, got {}",
            model.dim(),
            rows.cols()
        )));
    }
    let centered = Matrix::from_fn(rows.rows(), rows.cols(), |i, j| rows[(i, j)] - model.mean[j]);
    centered.matmul(&model.components.transpose())
}

pub fn pca_inverse<T: Scalar>(model: &PcaModel<T>, scores: &Matrix<T>) -> Result<Matrix<T>> {
    if scores.cols() != model.n_components() {
        return Err(Error::dims(format!(
            "PCA model has {} components, scores have {} columns",
            model.n_components(),
            scores.cols()
        )));
    }
    let mut out = scores.matmul(&model.components)?;
    for i in 0..out.rows() {
        out.row_mut(i).iter_mut().zip(&model.mean).for_each(|(v, &m)| *v += m);
    }
    Ok(out)
}
