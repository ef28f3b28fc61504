use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Labeled time span of a record, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelInterval {
    pub start_s: f64,
    pub end_s: f64,
    #[serde(rename = "class")]
    pub class_id: usize,
}

/// Raw multichannel time series: `samples` is `T_total × K`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelRecord<T> {
    pub samples: Matrix<T>,
    pub fs: f64,
    pub channel_names: Vec<String>,
    pub label_intervals: Vec<LabelInterval>,
}

impl<T: Scalar> MultiChannelRecord<T> {
    pub fn new(
        samples: Matrix<T>,
        fs: f64,
        channel_names: Vec<String>,
        mut label_intervals: Vec<LabelInterval>,
    ) -> Result<Self> {
        if !(fs > 0.0) || !fs.is_finite() {
            return Err(Error::InvalidRecord(format!("sampling rate must be positive, got {fs}")));
        }
        if samples.rows() == 0 || samples.cols() == 0 {
            return Err(Error::InvalidRecord("record needs at least one sample and one channel".into()));
        }
        if channel_names.len() != samples.cols() {
            return Err(Error::InvalidRecord(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                samples.cols()
            )));
        }
        let duration = samples.rows() as f64 / fs;
        for (i, iv) in label_intervals.iter().enumerate() {
            if !(iv.start_s >= 0.0) || !(iv.end_s > iv.start_s) {
                return Err(Error::InvalidRecord(format!(
                    "label {i}: interval ({}, {}) is empty or negative",
                    iv.start_s, iv.end_s
                )));
            }
            if iv.end_s > duration + 1e-9 {
                return Err(Error::InvalidRecord(format!(
                    "label {i}: interval exceeds duration ({} s > {duration} s)",
                    iv.end_s
                )));
            }
        }
        label_intervals.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        for w in label_intervals.windows(2) {
            if w[1].start_s < w[0].end_s {
                return Err(Error::InvalidRecord(format!(
                    "label intervals ({}, {}) and ({}, {}) overlap",
                    w[0].start_s, w[0].end_s, w[1].start_s, w[1].end_s
                )));
            }
        }
        Ok(Self {
            samples,
            fs,
            channel_names,
            label_intervals,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.rows()
    }

    pub fn n_channels(&self) -> usize {
        self.samples.cols()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn channel(&self, k: usize) -> Vec<T> {
        self.samples.column(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentOrigin {
    pub record: usize,
    pub start_sample: usize,
}

/// Fixed-length window of a record: `samples` is `L × K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<T> {
    pub samples: Matrix<T>,
    pub fs: f64,
    pub class_id: usize,
    pub origin: SegmentOrigin,
}

impl<T: Scalar> Segment<T> {
    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.rows() == 0
    }

    pub fn n_channels(&self) -> usize {
        self.samples.cols()
    }

    pub fn channel(&self, k: usize) -> Vec<T> {
        self.samples.column(k)
    }
}

/// Cuts a record into windows of `round(seg_seconds·fs)` samples.
///
/// Windows advance by `floor(L·(1 − overlap))` samples (at least one); a
/// trailing partial window is dropped. Each segment takes the class with the
/// largest sample overlap among the label intervals, unlabeled time counting
/// as class 0; ties go to the highest (positive) class id.
pub fn segment_record<T: Scalar>(
    record: &MultiChannelRecord<T>,
    record_id: usize,
    seg_seconds: f64,
    overlap_fraction: f64,
) -> Result<Vec<Segment<T>>> {
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::invalid(format!(
            "overlap fraction must lie in [0, 1), got {overlap_fraction}"
        )));
    }
    let len = (seg_seconds * record.fs).round();
    if !(len >= 1.0) {
        return Err(Error::invalid(format!(
            "segment of {seg_seconds} s at {} Hz has no samples",
            record.fs
        )));
    }
    let len = len as usize;
    let step = ((len as f64 * (1.0 - overlap_fraction)).floor() as usize).max(1);
    let total = record.n_samples();
    let k = record.n_channels();
    let spans: Vec<(usize, usize, usize)> = record
        .label_intervals
        .iter()
        .map(|iv| {
            let s = (iv.start_s * record.fs).round() as usize;
            let e = ((iv.end_s * record.fs).round() as usize).min(total);
            (s, e, iv.class_id)
        })
        .collect();
    let n_classes = spans.iter().map(|s| s.2 + 1).max().unwrap_or(1).max(2);

    let mut out = Vec::new();
    let mut start = 0;
    while start + len <= total {
        let end = start + len;
        let mut votes = vec![0usize; n_classes];
        let mut labeled = 0;
        for &(s, e, c) in &spans {
            let ov = end.min(e).saturating_sub(start.max(s));
            votes[c] += ov;
            labeled += ov;
        }
        votes[0] += len - labeled.min(len);
        let best = votes.iter().copied().max().unwrap_or(0);
        let class_id = votes.iter().rposition(|&v| v == best).unwrap_or(0);

        let data = record.samples.as_slice()[start * k..end * k].to_vec();
        out.push(Segment {
            samples: Matrix::new(len, k, data)?,
            fs: record.fs,
            class_id,
            origin: SegmentOrigin {
                record: record_id,
                start_sample: start,
            },
        });
        start += step;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, fs: f64, labels: Vec<LabelInterval>) -> MultiChannelRecord<f64> {
        let samples = Matrix::from_fn(n, 2, |r, c| (r * 2 + c) as f64);
        MultiChannelRecord::new(samples, fs, vec!["a".into(), "b".into()], labels).unwrap()
    }

    #[test]
    fn one_full_segment() {
        let r = record(7680, 256.0, vec![]);
        let segs = segment_record(&r, 0, 30.0, 0.0).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].len(), 7680);
    }

    #[test]
    fn ten_segments_from_300_seconds() {
        let r = record(300 * 4, 4.0, vec![]);
        assert_eq!(segment_record(&r, 0, 30.0, 0.0).unwrap().len(), 10);
    }

    #[test]
    fn half_overlap_window_starts() {
        // 45 s record, L = 30 s, step = 15 s: starts 0 and 15, the start at 30 s
        // would need 60 s of data
        let fs = 8.0;
        let r = record(45 * 8, fs, vec![]);
        let segs = segment_record(&r, 3, 30.0, 0.5).unwrap();
        let starts: Vec<usize> = segs.iter().map(|s| s.origin.start_sample).collect();
        assert_eq!(starts, vec![0, 15 * 8]);
        assert!(segs.iter().all(|s| s.origin.record == 3));
    }

    #[test]
    fn longer_than_record_is_empty() {
        let r = record(10, 1.0, vec![]);
        assert!(segment_record(&r, 0, 11.0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn bad_overlap_rejected() {
        let r = record(10, 1.0, vec![]);
        assert!(segment_record(&r, 0, 2.0, 1.0).is_err());
        assert!(segment_record(&r, 0, 2.0, -0.1).is_err());
        assert!(segment_record(&r, 0, 0.1, 0.0).is_err());
    }

    #[test]
    fn labels_by_majority_with_positive_ties() {
        let labels = vec![LabelInterval {
            start_s: 5.0,
            end_s: 15.0,
            class_id: 1,
        }];
        let r = record(20, 1.0, labels);
        let segs = segment_record(&r, 0, 10.0, 0.5).unwrap();
        // [0,10): 5 labeled vs 5 unlabeled -> tie -> 1; [5,15): fully inside -> 1;
        // [10,20): tie -> 1
        let classes: Vec<usize> = segs.iter().map(|s| s.class_id).collect();
        assert_eq!(classes, vec![1, 1, 1]);
        let segs = segment_record(&r, 0, 4.0, 0.0).unwrap();
        let classes: Vec<usize> = segs.iter().map(|s| s.class_id).collect();
        // [0,4) none, [4,8) 3 of 4, [8,12) all, [12,16) 3 of 4, [16,20) none
        assert_eq!(classes, vec![0, 1, 1, 1, 0]);
    }

    #[test]
    fn segments_tile_the_record_prefix() {
        let r = record(23, 1.0, vec![]);
        let segs = segment_record(&r, 0, 5.0, 0.0).unwrap();
        assert_eq!(segs.len(), 23 / 5);
        let joined: Vec<f64> = segs.iter().flat_map(|s| s.samples.as_slice().to_vec()).collect();
        assert_eq!(joined, r.samples.as_slice()[..joined.len()].to_vec());
    }

    #[test]
    fn invalid_records_rejected() {
        let m = Matrix::<f64>::zeros(4, 1);
        assert!(MultiChannelRecord::new(m.clone(), 0.0, vec!["a".into()], vec![]).is_err());
        let over = vec![LabelInterval { start_s: 0.0, end_s: 2.0, class_id: 1 }];
        let err = MultiChannelRecord::new(m.clone(), 4.0, vec!["a".into()], over).unwrap_err();
        assert!(err.to_string().contains("exceeds duration"));
        let overlapping = vec![
            LabelInterval { start_s: 0.0, end_s: 0.5, class_id: 1 },
            LabelInterval { start_s: 0.25, end_s: 0.75, class_id: 0 },
        ];
        assert!(MultiChannelRecord::new(m, 4.0, vec!["a".into()], overlapping).is_err());
    }
}
