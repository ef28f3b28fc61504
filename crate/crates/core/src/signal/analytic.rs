use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Analytic signal by the one-sided spectrum method: DC and (even `N`) the
/// Nyquist bin are kept, strictly positive bins doubled, negative bins zeroed.
///
/// The real part of the result is `x` itself, bit for bit.
pub fn analytic_signal<T: Scalar>(x: &[T]) -> Result<Vec<Complex<T>>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("analytic signal needs at least 2 samples"));
    }
    let mut planner = FftPlanner::<T>::new();
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let two = T::c(2.0);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == half) {
            continue;
        }
        if k <= (n - 1) / 2 {
            *c = *c * two;
        } else {
            *c = Complex::new(T::zero(), T::zero());
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = T::one() / T::from_usize_lossy(n);
    Ok(buf
        .into_iter()
        .zip(x)
        .map(|(c, &re)| Complex::new(re, c.im * scale))
        .collect())
}

/// Fraction of spectral energy at strictly negative frequencies. Near zero for
/// an analytic signal.
pub fn negative_frequency_energy_ratio<T: Scalar>(z: &[Complex<T>]) -> T {
    let n = z.len();
    if n < 2 {
        return T::zero();
    }
    let mut buf = z.to_vec();
    FftPlanner::<T>::new().plan_fft_forward(n).process(&mut buf);
    let total: T = buf.iter().map(|c| c.norm_sqr()).sum();
    if total == T::zero() {
        return T::zero();
    }
    let start = n / 2 + 1;
    let neg: T = buf[start..].iter().map(|c| c.norm_sqr()).sum();
    neg / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zeros_map_to_zeros() {
        let z = analytic_signal(&[0.0f64; 8]).unwrap();
        assert!(z.iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn rejects_short_input() {
        assert!(analytic_signal(&[1.0f64]).is_err());
    }

    #[test]
    fn exact_bin_cosine_becomes_complex_exponential() {
        let n = 16;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 2.0 * i as f64 / n as f64).cos()).collect();
        let z = analytic_signal(&x).unwrap();
        for (i, c) in z.iter().enumerate() {
            let phase = 2.0 * PI * 2.0 * i as f64 / n as f64;
            let dev = ((c.re - phase.cos()).powi(2) + (c.im - phase.sin()).powi(2)).sqrt();
            assert!(dev < 1e-10);
        }
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ez: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        assert!((ez - 2.0 * ex).abs() < 1e-9);
    }

    #[test]
    fn real_part_is_input_and_transform_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 17, 64] {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let (a, b) = (1.7, -0.3);
            let zx = analytic_signal(&x).unwrap();
            let zy = analytic_signal(&y).unwrap();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let zm = analytic_signal(&mix).unwrap();
            for i in 0..n {
                assert_eq!(zx[i].re, x[i]);
                let lin = zx[i] * a + zy[i] * b;
                assert!((zm[i] - lin).norm() < 1e-12);
            }
            assert!(negative_frequency_energy_ratio(&zx) < 1e-20);
        }
    }
}
