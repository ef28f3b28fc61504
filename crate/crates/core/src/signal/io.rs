//! Signal files: a CSV of samples (optional header of channel names, one row
//! per sample instant) plus a JSON sidecar
//! `{"fs": 256, "channels": [...], "labels": [{"start_s", "end_s", "class"}]}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::{LabelInterval, MultiChannelRecord};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMetadata {
    pub fs: f64,
    #[serde(default)]
    pub channels: Vec<String>,
    #[serde(default)]
    pub labels: Vec<LabelInterval>,
}

pub fn load_record<T: Scalar>(
    path: impl AsRef<Path>,
    metadata_path: impl AsRef<Path>,
) -> Result<MultiChannelRecord<T>> {
    let text = fs::read_to_string(path)?;
    let meta: RecordMetadata = serde_json::from_str(&fs::read_to_string(metadata_path)?)?;
    parse_record(&text, &meta)
}

/// Parses CSV text against its sidecar metadata.
///
/// A first row made only of non-numeric cells is a header of channel names.
/// Errors carry 1-based line and column numbers.
pub fn parse_record<T: Scalar>(csv_text: &str, meta: &RecordMetadata) -> Result<MultiChannelRecord<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut values: Vec<T> = Vec::new();
    let mut rows = 0usize;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            header = Some(rec.iter().map(str::to_string).collect());
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Parse {
                line,
                column: rec.len().min(w) + 1,
                message: format!("ragged row: expected {w} columns, found {}", rec.len()),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: j + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            values.push(T::c(v));
        }
        rows += 1;
    }
    let k = width.unwrap_or(0);
    if rows == 0 {
        return Err(Error::InvalidRecord("CSV contains no samples".into()));
    }
    let names = match (header, meta.channels.is_empty()) {
        (Some(h), _) => h,
        (None, false) => meta.channels.clone(),
        (None, true) => (0..k).map(|c| format!("ch{c}")).collect(),
    };
    if !meta.channels.is_empty() && meta.channels.len() != k {
        return Err(Error::InvalidRecord(format!(
            "sidecar lists {} channels, CSV has {k} columns",
            meta.channels.len()
        )));
    }
    MultiChannelRecord::new(Matrix::new(rows, k, values)?, meta.fs, names, meta.labels.clone())
}

/// Writes the record as CSV (with a header row) plus its JSON sidecar.
pub fn write_record<T: Scalar>(
    record: &MultiChannelRecord<T>,
    path: impl AsRef<Path>,
    metadata_path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", record.channel_names.join(","))?;
    for r in 0..record.n_samples() {
        let row: Vec<String> = record.samples.row(r).iter().map(|v| format!("{}", v.as_f64())).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    let meta = RecordMetadata {
        fs: record.fs,
        channels: record.channel_names.clone(),
        labels: record.label_intervals.clone(),
    };
    fs::write(metadata_path, serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(fs: f64) -> RecordMetadata {
        RecordMetadata {
            fs,
            channels: vec![],
            labels: vec![],
        }
    }

    #[test]
    fn shape_is_echoed() {
        let r: MultiChannelRecord<f64> =
            parse_record("1,2\n3,4\n5,6\n7,8\n", &meta(256.0)).unwrap();
        assert_eq!((r.n_samples(), r.n_channels()), (4, 2));
        assert_eq!(r.channel_names, vec!["ch0", "ch1"]);
    }

    #[test]
    fn header_row_gives_channel_names() {
        let text = "Fp1, Fp2\r\n0.5,1.5\r\n-1,2e-3\r\n2.25,0\r\n";
        let r: MultiChannelRecord<f64> = parse_record(text, &meta(128.0)).unwrap();
        let expected = MultiChannelRecord::new(
            Matrix::from_rows(&[vec![0.5, 1.5], vec![-1.0, 2e-3], vec![2.25, 0.0]]).unwrap(),
            128.0,
            vec!["Fp1".into(), "Fp2".into()],
            vec![],
        )
        .unwrap();
        assert_eq!(r, expected);
    }

    #[test]
    fn ragged_and_non_numeric_rows_report_position() {
        let err = parse_record::<f64>("1,2\n3\n", &meta(1.0)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_record::<f64>("1,2\n3,x\n", &meta(1.0)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 2, .. }), "{err}");
    }

    #[test]
    fn sidecar_errors() {
        assert!(parse_record::<f64>("1\n", &meta(0.0)).is_err());
        let mut m = meta(1.0);
        m.labels.push(LabelInterval {
            start_s: 0.0,
            end_s: 2.0,
            class_id: 1,
        });
        let err = parse_record::<f64>("1\n", &m).unwrap_err();
        assert!(err.to_string().contains("interval exceeds duration"));
    }

    #[test]
    fn sidecar_json_schema() {
        let json = r#"{"fs": 256, "channels": ["a"], "labels": [{"start_s": 0.0, "end_s": 1.0, "class": 1}]}"#;
        let m: RecordMetadata = serde_json::from_str(json).unwrap();
        assert_eq!(m.labels[0].class_id, 1);
        assert_eq!(m.channels, vec!["a"]);
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let r = MultiChannelRecord::new(
            Matrix::from_rows(&[vec![0.1, -2.0], vec![3.5, 1e-7]]).unwrap(),
            2.0,
            vec!["x".into(), "y".into()],
            vec![LabelInterval {
                start_s: 0.5,
                end_s: 1.0,
                class_id: 1,
            }],
        )
        .unwrap();
        let (c, j) = (dir.path().join("r.csv"), dir.path().join("r.json"));
        write_record(&r, &c, &j).unwrap();
        let back: MultiChannelRecord<f64> = load_record(&c, &j).unwrap();
        assert_eq!(back, r);
    }
}
