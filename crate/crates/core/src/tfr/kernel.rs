use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::WindowSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TfdMethod {
    #[serde(rename = "WV")]
    Wv,
    #[serde(rename = "SWV")]
    Swv,
    #[serde(rename = "SPEC")]
    Spec,
    #[serde(rename = "GK")]
    Gk,
    #[serde(rename = "MB")]
    Mb,
    #[serde(rename = "SPEK")]
    Spek,
}

impl TfdMethod {
    pub const ALL: [TfdMethod; 6] = [
        TfdMethod::Wv,
        TfdMethod::Swv,
        TfdMethod::Spec,
        TfdMethod::Gk,
        TfdMethod::Mb,
        TfdMethod::Spek,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TfdMethod::Wv => "WV",
            TfdMethod::Swv => "SWV",
            TfdMethod::Spec => "SPEC",
            TfdMethod::Gk => "GK",
            TfdMethod::Mb => "MB",
            TfdMethod::Spek => "SPEK",
        }
    }
}

impl std::fmt::Display for TfdMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TfdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TfdMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown TFD method {s:?}")))
    }
}

/// Kernel of a quadratic time-frequency distribution.
///
/// * `window`: time smoother for SWV and SPEK, analysis window for SPEC.
/// * `lag_window`: lag taper for SPEK. A window of length `L` covers lags
///   `|m| ≤ (L−1)/2` and is evaluated as the odd-length window of the same kind
///   with `2·⌊(L−1)/2⌋ + 1` taps.
/// * `gk_sigma`: Gaussian (Choi-Williams) kernel `exp(−(ν·τ)²/σ)`, Doppler `ν`
///   in cycles/sample, lag `τ = 2m` samples.
/// * `mb_beta`: modified-B time smoother `cosh(n)^(−2β)`, normalized to unit sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub method: TfdMethod,
    pub window: WindowSpec,
    pub lag_window: WindowSpec,
    #[serde(default = "default_gk_sigma")]
    pub gk_sigma: f64,
    #[serde(default = "default_mb_beta")]
    pub mb_beta: f64,
}

fn default_gk_sigma() -> f64 {
    0.8
}

fn default_mb_beta() -> f64 {
    0.02
}

impl KernelSpec {
    /// Hanning window of `fs/4` samples, Hanning lag window spanning the
    /// default `n_fft = 2·fs/4` lags, σ = 0.8, β = 0.02.
    pub fn with_defaults(method: TfdMethod, fs: f64) -> Self {
        let win = ((fs / 4.0).round() as usize).max(1);
        Self {
            method,
            window: WindowSpec::hanning(win),
            lag_window: WindowSpec::hanning((2 * win).max(2) - 1),
            gk_sigma: default_gk_sigma(),
            mb_beta: default_mb_beta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gk_sigma > 0.0) {
            return Err(Error::invalid(format!("gk_sigma must be positive, got {}", self.gk_sigma)));
        }
        if !(self.mb_beta > 0.0 && self.mb_beta <= 1.0) {
            return Err(Error::invalid(format!("mb_beta must lie in (0, 1], got {}", self.mb_beta)));
        }
        if self.window.length == 0 || self.lag_window.length == 0 {
            return Err(Error::invalid("kernel windows need at least one tap"));
        }
        Ok(())
    }
}

/// Default lag-FFT size for a sampling rate: twice the `fs/4` window.
pub fn default_n_fft(fs: f64) -> usize {
    2 * ((fs / 4.0).round() as usize).max(2)
}
