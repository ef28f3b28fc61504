use num_complex::Complex;
use rustfft::FftPlanner;

use super::image::TfImage;
use super::kernel::{KernelSpec, TfdMethod};
use super::spectrogram::spectrogram;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::signal::{make_window, negative_frequency_energy_ratio, WindowSpec};

/// Time smoothers up to this many taps are applied by direct convolution,
/// longer ones through zero-padded FFTs.
const DIRECT_TAPS: usize = 32;

/// Negative-frequency energy fraction above which input is flagged as not analytic.
const ANALYTIC_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TfdDiagnostics {
    pub negative_frequency_ratio: f64,
    /// Input had noticeable negative-frequency content, so the distribution
    /// is prone to aliasing.
    pub aliasing_risk: bool,
    /// Largest imaginary part left by the lag DFT, relative to the largest
    /// real magnitude.
    pub max_imag_residue: f64,
}

/// Discrete pseudo Wigner-Ville distribution; see the module docs for the
/// lag convention.
pub fn wigner_ville<T: Scalar>(z: &[Complex<T>], n_fft: usize, fs: f64) -> Result<(TfImage<T>, TfdDiagnostics)> {
    check_input(z, n_fft)?;
    let lags = LagMatrix::build(z, n_fft, None)?;
    lags.into_image(z, fs)
}

/// Quadratic distribution of `z` under one of the six kernels.
///
/// SPEC is delegated to [`spectrogram`] on the real part of `z` with hop 1, so
/// it matches the spectrogram path exactly and keeps the one-sided layout.
pub fn cohen_tfd<T: Scalar>(
    z: &[Complex<T>],
    kernel: &KernelSpec,
    n_fft: usize,
    fs: f64,
) -> Result<(TfImage<T>, TfdDiagnostics)> {
    kernel.validate()?;
    check_input(z, n_fft)?;
    match kernel.method {
        TfdMethod::Wv => wigner_ville(z, n_fft, fs),
        TfdMethod::Spec => {
            let x: Vec<T> = z.iter().map(|c| c.re).collect();
            let img = spectrogram(&x, kernel.window, 1, n_fft, fs)?;
            let ratio = negative_frequency_energy_ratio(z).as_f64();
            Ok((
                img,
                TfdDiagnostics {
                    negative_frequency_ratio: ratio,
                    aliasing_risk: ratio > ANALYTIC_TOLERANCE,
                    max_imag_residue: 0.0,
                },
            ))
        }
        TfdMethod::Swv => {
            let mut lags = LagMatrix::build(z, n_fft, None)?;
            let g = normalized_window::<T>(kernel.window)?;
            lags.smooth_time(&g, (g.len() - 1) / 2);
            lags.into_image(z, fs)
        }
        TfdMethod::Spek => {
            let mut lags = LagMatrix::build(z, n_fft, Some(kernel.lag_window))?;
            let g = normalized_window::<T>(kernel.window)?;
            lags.smooth_time(&g, (g.len() - 1) / 2);
            lags.into_image(z, fs)
        }
        TfdMethod::Mb => {
            let mut lags = LagMatrix::build(z, n_fft, None)?;
            let (g, centre) = modified_b_kernel::<T>(kernel.mb_beta, z.len());
            lags.smooth_time(&g, centre);
            lags.into_image(z, fs)
        }
        TfdMethod::Gk => {
            let mut lags = LagMatrix::build(z, n_fft, None)?;
            lags.gaussian_doppler(kernel.gk_sigma);
            lags.into_image(z, fs)
        }
    }
}

fn check_input<T: Scalar>(z: &[Complex<T>], n_fft: usize) -> Result<()> {
    if z.len() < 4 {
        return Err(Error::invalid(format!("need at least 4 samples, got {}", z.len())));
    }
    if n_fft < 4 || !n_fft.is_multiple_of(2) {
        return Err(Error::invalid(format!("n_fft must be even and at least 4, got {n_fft}")));
    }
    Ok(())
}

fn normalized_window<T: Scalar>(spec: WindowSpec) -> Result<Vec<T>> {
    let w: Vec<T> = make_window(spec)?;
    let sum: T = w.iter().copied().sum();
    if !(sum > T::zero()) {
        return Err(Error::invalid("smoothing window sums to zero"));
    }
    Ok(w.into_iter().map(|v| v / sum).collect())
}

/// `cosh(n)^(−2β)` over `|n| ≤ J`, normalized to unit sum, with `J` the first
/// lag where the weight drops below `1e-12` (capped at the signal length).
fn modified_b_kernel<T: Scalar>(beta: f64, n: usize) -> (Vec<T>, usize) {
    // ln cosh(j) = j + ln((1 + e^{-2j}) / 2)
    let weight = |j: f64| (-2.0 * beta * (j + ((1.0 + (-2.0 * j).exp()) / 2.0).ln())).exp();
    let mut half = 0usize;
    while half + 1 < n && weight((half + 1) as f64) >= 1e-12 {
        half += 1;
    }
    let taps: Vec<f64> = (0..=2 * half).map(|i| weight((i as f64 - half as f64).abs())).collect();
    let sum: f64 = taps.iter().sum();
    (taps.into_iter().map(|v| T::c(v / sum)).collect(), half)
}

/// Instantaneous autocorrelation stored lag-major: `cols[m][n]` for lag
/// indices `m = 0..n_fft/2` (non-negative lags only; negative lags are the
/// conjugates and are filled in when the rows are transformed).
struct LagMatrix<T> {
    n: usize,
    n_fft: usize,
    cols: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> LagMatrix<T> {
    fn build(z: &[Complex<T>], n_fft: usize, lag_window: Option<WindowSpec>) -> Result<Self> {
        let n = z.len();
        let max_lag = n_fft / 2 - 1;
        let taper: Option<Vec<T>> = match lag_window {
            Some(spec) => {
                let half = (spec.length - 1) / 2;
                let w: Vec<T> = make_window(WindowSpec::new(spec.kind, 2 * half + 1))?;
                Some((0..=max_lag).map(|m| if m <= half { w[half + m] } else { T::zero() }).collect())
            }
            None => None,
        };
        let zero = Complex::new(T::zero(), T::zero());
        let mut cols = vec![vec![zero; n]; max_lag + 1];
        for t in 0..n {
            let reach = t.min(n - 1 - t).min(max_lag);
            for m in 0..=reach {
                let mut v = z[t + m] * z[t - m].conj();
                if let Some(h) = &taper {
                    v = v * h[m];
                }
                cols[m][t] = v;
            }
        }
        Ok(Self { n, n_fft, cols })
    }

    /// Convolves every lag column along time with `g`, tap `centre` aligned
    /// to the output sample. Samples outside the signal count as zero.
    fn smooth_time(&mut self, g: &[T], centre: usize) {
        if g.len() <= DIRECT_TAPS {
            for col in self.cols.iter_mut() {
                *col = convolve_direct(col, g, centre);
            }
            return;
        }
        let n = self.n;
        let size = (n + g.len()).next_power_of_two();
        let mut planner = FftPlanner::<T>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let zero = Complex::new(T::zero(), T::zero());
        // kernel placed so that output index t collects g[j]·x[t + centre − j]
        let mut h = vec![zero; size];
        for (j, &w) in g.iter().enumerate() {
            let shift = (j as isize - centre as isize).rem_euclid(size as isize) as usize;
            h[shift] = Complex::new(w, T::zero());
        }
        fwd.process(&mut h);
        let scale = T::one() / T::from_usize_lossy(size);
        let mut buf = vec![zero; size];
        for col in self.cols.iter_mut() {
            buf[..n].copy_from_slice(col);
            buf[n..].fill(zero);
            fwd.process(&mut buf);
            for (b, &k) in buf.iter_mut().zip(&h) {
                *b = *b * k;
            }
            inv.process(&mut buf);
            for (c, b) in col.iter_mut().zip(&buf) {
                *c = *b * scale;
            }
        }
    }

    /// Multiplies each lag column, in the Doppler domain, by
    /// `exp(−(ν·τ)²/σ)` with `τ = 2m` samples.
    fn gaussian_doppler(&mut self, sigma: f64) {
        let n = self.n;
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::<T>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; size];
        for (m, col) in self.cols.iter_mut().enumerate().skip(1) {
            let tau = 2.0 * m as f64;
            buf[..n].copy_from_slice(col);
            buf[n..].fill(zero);
            fwd.process(&mut buf);
            for (q, b) in buf.iter_mut().enumerate() {
                let nu = if q <= size / 2 { q as f64 } else { q as f64 - size as f64 } / size as f64;
                let gain = (-(nu * tau).powi(2) / sigma).exp();
                *b = *b * T::c(gain / size as f64);
            }
            inv.process(&mut buf);
            col.copy_from_slice(&buf[..n]);
        }
    }

    fn into_image(self, z: &[Complex<T>], fs: f64) -> Result<(TfImage<T>, TfdDiagnostics)> {
        let (n, n_fft) = (self.n, self.n_fft);
        let fft = FftPlanner::<T>::new().plan_fft_forward(n_fft);
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        let mut row = vec![zero; n_fft];
        let mut values = Matrix::zeros(n, n_fft);
        let mut max_re = T::zero();
        let mut max_im = T::zero();
        for t in 0..n {
            row.fill(zero);
            row[0] = Complex::new(self.cols[0][t].re, T::zero());
            for m in 1..self.cols.len() {
                let v = self.cols[m][t];
                row[m] = v;
                row[n_fft - m] = v.conj();
            }
            fft.process_with_scratch(&mut row, &mut scratch);
            for (out, c) in values.row_mut(t).iter_mut().zip(&row) {
                *out = c.re;
                max_re = max_re.max(c.re.abs());
                max_im = max_im.max(c.im.abs());
            }
        }
        let ratio = negative_frequency_energy_ratio(z).as_f64();
        let residue = if max_re > T::zero() { (max_im / max_re).as_f64() } else { max_im.as_f64() };
        let t_axis = (0..n).map(|t| t as f64 / fs).collect();
        let f_axis = (0..n_fft).map(|k| k as f64 * fs / (2.0 * n_fft as f64)).collect();
        Ok((
            TfImage::new(values, t_axis, f_axis)?,
            TfdDiagnostics {
                negative_frequency_ratio: ratio,
                aliasing_risk: ratio > ANALYTIC_TOLERANCE,
                max_imag_residue: residue,
            },
        ))
    }
}

fn convolve_direct<T: Scalar>(x: &[Complex<T>], g: &[T], centre: usize) -> Vec<Complex<T>> {
    let n = x.len();
    (0..n)
        .map(|t| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, &w) in g.iter().enumerate() {
                let src = t as isize + centre as isize - j as isize;
                if src >= 0 && (src as usize) < n {
                    acc = acc + x[src as usize] * w;
                }
            }
            acc
        })
        .collect()
}
