use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Time-frequency energy map: rows are time instants, columns frequency bins.
#[derive(Clone, Debug, PartialEq)]
pub struct TfImage<T> {
    pub values: Matrix<T>,
    /// Seconds.
    pub t_axis: Vec<f64>,
    /// Hz.
    pub f_axis: Vec<f64>,
}

impl<T: Scalar> TfImage<T> {
    pub fn new(values: Matrix<T>, t_axis: Vec<f64>, f_axis: Vec<f64>) -> Result<Self> {
        if t_axis.len() != values.rows() || f_axis.len() != values.cols() {
            return Err(Error::dims(format!(
                "axes of length {}x{} for a {}x{} image",
                t_axis.len(),
                f_axis.len(),
                values.rows(),
                values.cols()
            )));
        }
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("time-frequency image has non-finite entries"));
        }
        Ok(Self { values, t_axis, f_axis })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            values: self.values.scale(s),
            t_axis: self.t_axis.clone(),
            f_axis: self.f_axis.clone(),
        }
    }

    pub fn mean(&self) -> T {
        let n = self.values.as_slice().len().max(1);
        self.values.as_slice().iter().copied().sum::<T>() / T::from_usize_lossy(n)
    }
}

/// Bilinear resize on the sample grid with aligned corners (output index `i`
/// samples input coordinate `i·(in−1)/(out−1)`, a single output sample sits at
/// the centre), followed by a multiplicative correction that restores the
/// input mean. The correction is skipped when the interpolated mean is
/// numerically zero.
pub fn resize_image<T: Scalar>(img: &TfImage<T>, out_t: usize, out_f: usize) -> Result<TfImage<T>> {
    if out_t == 0 || out_f == 0 {
        return Err(Error::invalid("resize target must be at least 1x1"));
    }
    let (in_t, in_f) = img.dims();
    if (in_t, in_f) == (out_t, out_f) {
        return Ok(img.clone());
    }
    let coords = |n_in: usize, n_out: usize| -> Vec<(usize, usize, f64)> {
        (0..n_out)
            .map(|i| {
                let x = if n_out == 1 {
                    (n_in - 1) as f64 / 2.0
                } else {
                    i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64
                };
                let lo = (x.floor() as usize).min(n_in - 1);
                let hi = (lo + 1).min(n_in - 1);
                (lo, hi, x - lo as f64)
            })
            .collect()
    };
    let rows = coords(in_t, out_t);
    let cols = coords(in_f, out_f);
    let v = &img.values;
    let mut out = Matrix::from_fn(out_t, out_f, |i, j| {
        let (r0, r1, fr) = rows[i];
        let (c0, c1, fc) = cols[j];
        let (fr, fc) = (T::c(fr), T::c(fc));
        let one = T::one();
        let top = v[(r0, c0)] * (one - fc) + v[(r0, c1)] * fc;
        let bottom = v[(r1, c0)] * (one - fc) + v[(r1, c1)] * fc;
        top * (one - fr) + bottom * fr
    });
    let mean_in = img.mean();
    let n_out = T::from_usize_lossy(out_t * out_f);
    let mean_out = out.as_slice().iter().copied().sum::<T>() / n_out;
    let max_abs = out.as_slice().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if mean_out.abs() > max_abs * T::c(1e-12) && mean_out != mean_in {
        let s = mean_in / mean_out;
        out = out.scale(s);
    }
    let interp_axis = |axis: &[f64], pts: &[(usize, usize, f64)]| -> Vec<f64> {
        pts.iter().map(|&(a, b, f)| axis[a] * (1.0 - f) + axis[b] * f).collect()
    };
    TfImage::new(out, interp_axis(&img.t_axis, &rows), interp_axis(&img.f_axis, &cols))
}

#[derive(Serialize, Deserialize)]
struct AxesSidecar {
    t_axis: Vec<f64>,
    f_axis: Vec<f64>,
}

/// Dumps the image as a CSV matrix (one row per time instant) and a JSON
/// sidecar `{"t_axis": [...], "f_axis": [...]}`.
pub fn write_image<T: Scalar>(img: &TfImage<T>, csv_path: impl AsRef<Path>, axes_path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(csv_path)?);
    for r in 0..img.values.rows() {
        let row: Vec<String> = img.values.row(r).iter().map(|v| format!("{}", v.as_f64())).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    let axes = AxesSidecar {
        t_axis: img.t_axis.clone(),
        f_axis: img.f_axis.clone(),
    };
    fs::write(axes_path, serde_json::to_string_pretty(&axes)?)?;
    Ok(())
}

pub fn read_image<T: Scalar>(csv_path: impl AsRef<Path>, axes_path: impl AsRef<Path>) -> Result<TfImage<T>> {
    let axes: AxesSidecar = serde_json::from_str(&fs::read_to_string(axes_path)?)?;
    let text = fs::read_to_string(csv_path)?;
    let mut data = Vec::new();
    for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        for (col, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line: line_no + 1,
                column: col + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            data.push(T::c(v));
        }
    }
    let values = Matrix::new(axes.t_axis.len(), axes.f_axis.len(), data)?;
    TfImage::new(values, axes.t_axis, axes.f_axis)
}
