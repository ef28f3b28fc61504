//! Time-frequency images of single channels.
//!
//! # Discrete conventions
//!
//! The quadratic distributions use the pseudo-Wigner-Ville construction. For an
//! analytic signal `z` of length `N` and an even lag-FFT size `n_fft`, row `n`
//! starts from the instantaneous autocorrelation
//!
//! ```text
//! K_n[m] = z[n+m]·conj(z[n−m]),   |m| ≤ M_n = min(n, N−1−n, n_fft/2 − 1)
//! ```
//!
//! stored at FFT index `m` for `m ≥ 0` and `n_fft − |m|` for `m < 0`, all other
//! lags zero. Kernels act on `K` (smoothing along `n`, weighting along `m`),
//! then a length-`n_fft` DFT over lag gives row `n`. Because the lag vector is
//! Hermitian the result is real; its imaginary residue is reported in
//! [`TfdDiagnostics`]. Bin `k` sits at `k·fs/(2·n_fft)` Hz, so the `n_fft` bins
//! span `[0, fs/2)` for analytic input.
//!
//! Marginal weighting: every bin has weight `1/n_fft`, i.e.
//! `Σ_k W[n,k] / n_fft = K_n[0] = |z[n]|²` for the unsmoothed distribution.
//!
//! The spectrogram keeps the usual one-sided layout: `n_fft/2 + 1` bins at
//! `k·fs/n_fft` Hz, interior bins carrying weight 2 in Parseval sums.

mod cohen;
mod image;
mod kernel;
mod spectrogram;

pub use cohen::{cohen_tfd, wigner_ville, TfdDiagnostics};
pub use image::{read_image, resize_image, write_image, TfImage};
pub use kernel::{default_n_fft, KernelSpec, TfdMethod};
pub use spectrogram::spectrogram;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::signal::{analytic_signal, Segment};

/// Converts every channel of a segment into a time-frequency image of size
/// `out_dims = (time, frequency)`.
///
/// SPEC runs the spectrogram on the real channel (hop of one sample); the
/// other methods transform the analytic signal with [`cohen_tfd`].
pub fn segment_to_images<T: Scalar>(
    segment: &Segment<T>,
    kernel: &KernelSpec,
    n_fft: usize,
    out_dims: (usize, usize),
) -> Result<Vec<TfImage<T>>> {
    kernel.validate()?;
    (0..segment.n_channels())
        .map(|k| {
            let x = segment.channel(k);
            let img = channel_image(&x, kernel, n_fft, segment.fs)?;
            resize_image(&img, out_dims.0, out_dims.1)
        })
        .collect()
}

/// Full-resolution image of one channel.
pub fn channel_image<T: Scalar>(x: &[T], kernel: &KernelSpec, n_fft: usize, fs: f64) -> Result<TfImage<T>> {
    if kernel.method == TfdMethod::Spec {
        spectrogram(x, kernel.window, 1, n_fft, fs)
    } else {
        let z = analytic_signal(x)?;
        Ok(cohen_tfd(&z, kernel, n_fft, fs)?.0)
    }
}
