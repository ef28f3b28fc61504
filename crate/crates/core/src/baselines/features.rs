use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub label: usize,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(values: Vec<T>, label: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature values must be finite"));
        }
        Ok(Self { values, label })
    }
}

/// One row per vector, label in the last column.
pub fn write_features<T: Scalar>(path: impl AsRef<Path>, features: &[FeatureVector<T>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for f in features {
        let mut row: Vec<String> = f.values.iter().map(|v| format!("{:e}", v.as_f64())).collect();
        row.push(f.label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<FeatureVector<T>>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        let n = rec.len();
        if n < 2 {
            return Err(Error::Parse {
                line,
                column: 1,
                message: "feature rows need at least one value and a label".into(),
            });
        }
        let mut values = Vec::with_capacity(n - 1);
        for (c, cell) in rec.iter().take(n - 1).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line,
                column: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            values.push(T::c(v));
        }
        let label = rec[n - 1].trim().parse().map_err(|_| Error::Parse {
            line,
            column: n,
            message: format!("label must be a non-negative integer, got {:?}", &rec[n - 1]),
        })?;
        out.push(FeatureVector::new(values, label).map_err(|e| Error::Parse {
            line,
            column: 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let fs = vec![
            FeatureVector::new(vec![1.0, -2.5, 1e-9], 0).unwrap(),
            FeatureVector::new(vec![0.0, 3.0, 4.0], 1).unwrap(),
        ];
        write_features(&p, &fs).unwrap();
        assert_eq!(read_features::<f64>(&p).unwrap(), fs);
        std::fs::write(&p, "1.0,x,0\n").unwrap();
        assert!(matches!(read_features::<f64>(&p), Err(Error::Parse { line: 1, column: 2, .. })));
    }
}
