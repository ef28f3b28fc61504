use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dense::Tensor3;
use super::factors::CpFactors;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"TNS3";

/// Binary layout: `TNS3`, three little-endian `u32` dims, then `T·F·K`
/// little-endian `f64` values in `[t][f][k]` order.
pub fn tensor_to_bytes<T: Scalar>(x: &Tensor3<T>) -> Vec<u8> {
    let (a, b, c) = x.dims();
    let mut out = Vec::with_capacity(16 + 8 * x.as_slice().len());
    out.extend_from_slice(MAGIC);
    for d in [a, b, c] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in x.as_slice() {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

pub fn tensor_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<Tensor3<T>> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing TNS3 header".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let dims = (dim(0), dim(1), dim(2));
    let n = dims.0 * dims.1 * dims.2;
    let body = &bytes[16..];
    if body.len() != 8 * n {
        return Err(Error::Format(format!(
            "tensor {dims:?} needs {} data bytes, file has {}",
            8 * n,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|ch| T::c(f64::from_le_bytes(ch.try_into().unwrap())))
        .collect();
    Tensor3::new(dims, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_tensor<T: Scalar>(path: impl AsRef<Path>, x: &Tensor3<T>) -> Result<()> {
    fs::write(path, tensor_to_bytes(x))?;
    Ok(())
}

pub fn read_tensor<T: Scalar>(path: impl AsRef<Path>) -> Result<Tensor3<T>> {
    tensor_from_bytes(&fs::read(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorManifest {
    #[serde(rename = "R")]
    pub rank: usize,
    pub dims: [usize; 3],
    pub final_error: f64,
}

fn write_matrix<T: Scalar>(path: &Path, m: &Matrix<T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..m.rows() {
        w.write_record(m.row(r).iter().map(|v| format!("{:e}", v.as_f64())))?;
    }
    w.flush()?;
    Ok(())
}

fn read_matrix<T: Scalar>(path: &Path) -> Result<Matrix<T>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.trim().parse::<f64>().map(T::c).map_err(|e| Error::Parse {
                    line: line + 1,
                    column: col + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

/// Writes `A.csv`, `B.csv`, `C.csv` and `manifest.json` into `dir`.
pub fn write_factors<T: Scalar>(dir: impl AsRef<Path>, factors: &CpFactors<T>, final_error: f64) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("A.csv"), &factors.a)?;
    write_matrix(&dir.join("B.csv"), &factors.b)?;
    write_matrix(&dir.join("C.csv"), &factors.c)?;
    let (t, f, k) = factors.dims();
    let manifest = FactorManifest {
        rank: factors.rank(),
        dims: [t, f, k],
        final_error,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn read_factors<T: Scalar>(dir: impl AsRef<Path>) -> Result<(CpFactors<T>, FactorManifest)> {
    let dir = dir.as_ref();
    let manifest: FactorManifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let factors = CpFactors::new(
        read_matrix(&dir.join("A.csv"))?,
        read_matrix(&dir.join("B.csv"))?,
        read_matrix(&dir.join("C.csv"))?,
    )?;
    let (t, f, k) = factors.dims();
    if [t, f, k] != manifest.dims || factors.rank() != manifest.rank {
        return Err(Error::Format("factor files disagree with manifest".into()));
    }
    Ok((factors, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let x = Tensor3::from_fn((2, 3, 4), |t, f, k| (t as f64) - 0.25 * f as f64 + 1e-3 * k as f64);
        let bytes = tensor_to_bytes(&x);
        assert_eq!(&bytes[..4], b"TNS3");
        assert_eq!(bytes.len(), 16 + 8 * 24);
        let y: Tensor3<f64> = tensor_from_bytes(&bytes).unwrap();
        assert_eq!(x, y);
        assert!(tensor_from_bytes::<f64>(&bytes[..20]).is_err());
        assert!(tensor_from_bytes::<f64>(b"NOPE0000000000000000").is_err());
    }

    #[test]
    fn factor_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = |r: usize| Matrix::from_fn(r, 2, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
        let f = CpFactors::new(m(3), m(4), m(5)).unwrap();
        write_factors(dir.path(), &f, 0.125).unwrap();
        let (g, man) = read_factors::<f64>(dir.path()).unwrap();
        assert_eq!(man.rank, 2);
        assert_eq!(man.dims, [3, 4, 5]);
        assert!(g.a.max_abs_diff(&f.a) < 1e-15 && g.c.max_abs_diff(&f.c) < 1e-15);
        let json = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(json.contains("\"R\""));
    }
}
