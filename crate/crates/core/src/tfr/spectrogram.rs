use num_complex::Complex;
use rustfft::FftPlanner;

use super::image::TfImage;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::signal::{make_window, WindowSpec};

/// Squared-magnitude STFT over one-sided bins.
///
/// Frame `t` covers samples `[t·hop, t·hop + L)` (trailing partial frame
/// dropped), is multiplied by the window and zero-padded to `n_fft`;
/// `values[t][f] = |DFT_f|²` for `f = 0..=n_fft/2`.
pub fn spectrogram<T: Scalar>(
    x: &[T],
    window: WindowSpec,
    hop: usize,
    n_fft: usize,
    fs: f64,
) -> Result<TfImage<T>> {
    let w: Vec<T> = make_window(window)?;
    let len = w.len();
    if len > n_fft {
        return Err(Error::invalid(format!("window length {len} exceeds n_fft {n_fft}")));
    }
    if hop == 0 {
        return Err(Error::invalid("hop must be at least 1"));
    }
    if x.len() < len {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than the {len}-sample window",
            x.len()
        )));
    }
    let frames = (x.len() - len) / hop + 1;
    let bins = n_fft / 2 + 1;
    let fft = FftPlanner::<T>::new().plan_fft_forward(n_fft);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n_fft];
    let mut values = Matrix::zeros(frames, bins);
    for t in 0..frames {
        let start = t * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = if i < len {
                Complex::new(x[start + i] * w[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            };
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (v, c) in values.row_mut(t).iter_mut().zip(&buf) {
            *v = c.norm_sqr();
        }
    }
    let t_axis = (0..frames)
        .map(|t| (t * hop) as f64 / fs + (len - 1) as f64 / (2.0 * fs))
        .collect();
    let f_axis = (0..bins).map(|f| f as f64 * fs / n_fft as f64).collect();
    TfImage::new(values, t_axis, f_axis)
}
