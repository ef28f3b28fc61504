use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hanning,
    Hamming,
    Rectangular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub length: usize,
}

impl WindowSpec {
    pub fn new(kind: WindowKind, length: usize) -> Self {
        Self { kind, length }
    }

    pub fn hanning(length: usize) -> Self {
        Self::new(WindowKind::Hanning, length)
    }

    pub fn hamming(length: usize) -> Self {
        Self::new(WindowKind::Hamming, length)
    }

    pub fn rectangular(length: usize) -> Self {
        Self::new(WindowKind::Rectangular, length)
    }
}

/// Symmetric window weights, `w[n] = w[N-1-n]`.
///
/// Hanning is `0.5·(1 − cos(2πn/(N−1)))`, Hamming `0.54 − 0.46·cos(2πn/(N−1))`;
/// a length-1 window of any kind is `[1]`.
pub fn make_window<T: Scalar>(spec: WindowSpec) -> Result<Vec<T>> {
    let n = spec.length;
    if n == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![T::one()]);
    }
    let denom = (n - 1) as f64;
    let w = (0..n)
        .map(|i| {
            // mirror the index so symmetry holds bit-for-bit
            let i = i.min(n - 1 - i) as f64;
            let phase = 2.0 * std::f64::consts::PI * i / denom;
            let v = match spec.kind {
                WindowKind::Hanning => 0.5 * (1.0 - phase.cos()),
                WindowKind::Hamming => 0.54 - 0.46 * phase.cos(),
                WindowKind::Rectangular => 1.0,
            };
            T::c(v.max(0.0))
        })
        .collect();
    Ok(w)
}
