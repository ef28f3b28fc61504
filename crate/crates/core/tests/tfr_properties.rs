use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use superslice::matrix::Matrix;
use superslice::signal::{analytic_signal, make_window, Segment, SegmentOrigin, WindowSpec};
use superslice::tfr::{
    channel_image, cohen_tfd, segment_to_images, spectrogram, wigner_ville, KernelSpec, TfdMethod,
};

const FS: f64 = 256.0;
const N_FFT: usize = 64;

fn kernel(method: TfdMethod) -> KernelSpec {
    KernelSpec::with_defaults(method, FS)
}

fn two_tones(n: usize) -> Vec<Complex<f64>> {
    // WV bins 4 and 12: bin b sits at b / (2·n_fft) cycles per sample
    let f1 = 4.0 / (2.0 * N_FFT as f64);
    let f2 = 12.0 / (2.0 * N_FFT as f64);
    (0..n)
        .map(|i| {
            Complex::from_polar(1.0, 2.0 * PI * f1 * i as f64)
                + Complex::from_polar(1.0, 2.0 * PI * f2 * i as f64)
        })
        .collect()
}

fn ridge(method: TfdMethod, z: &[Complex<f64>]) -> f64 {
    let (img, _) = cohen_tfd(z, &kernel(method), N_FFT, FS).unwrap();
    let n = z.len();
    (n / 4..3 * n / 4).map(|t| img.values[(t, 8)].abs()).fold(0.0, f64::max)
}

#[test]
fn cross_term_is_suppressed_by_every_smoothing_kernel() {
    let z = two_tones(512);
    let wv = ridge(TfdMethod::Wv, &z);
    // the cross-term of two unit tones over 2·31+1 lags has amplitude ≈ 2·63
    assert!(wv > 100.0, "WV ridge {wv}");
    for method in [TfdMethod::Swv, TfdMethod::Gk, TfdMethod::Mb, TfdMethod::Spek] {
        let r = ridge(method, &z);
        assert!(wv >= 2.0 * r, "{method}: WV ridge {wv} vs {r}");
    }
    assert!(ridge(TfdMethod::Mb, &z) < wv);
}

#[test]
fn quadratic_homogeneity_for_all_methods() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<f64> = (0..300).map(|_| rng.random::<f64>() - 0.5).collect();
    let a = -2.5;
    let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
    for method in TfdMethod::ALL {
        let base = channel_image(&x, &kernel(method), N_FFT, FS).unwrap();
        let scaled = channel_image(&ax, &kernel(method), N_FFT, FS).unwrap();
        let expected = base.values.scale(a * a);
        let tol = 1e-9 * expected.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        assert!(scaled.values.max_abs_diff(&expected) < tol, "{method}");
    }
}

#[test]
fn spectrogram_frame_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..400).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    for (n_fft, win, hop) in [(64usize, 64usize, 16usize), (64, 48, 7), (65, 33, 5)] {
        let spec = WindowSpec::hanning(win);
        let img = spectrogram(&x, spec, hop, n_fft, FS).unwrap();
        let w: Vec<f64> = make_window(spec).unwrap();
        let bins = img.values.cols();
        for t in 0..img.values.rows() {
            let frame_energy: f64 = (0..win).map(|i| (x[t * hop + i] * w[i]).powi(2)).sum();
            let weighted: f64 = (0..bins)
                .map(|k| {
                    let double = k != 0 && !(n_fft % 2 == 0 && k == n_fft / 2);
                    img.values[(t, k)] * if double { 2.0 } else { 1.0 }
                })
                .sum();
            assert!((weighted - n_fft as f64 * frame_energy).abs() < 1e-9, "n_fft {n_fft} frame {t}");
        }
    }
}

#[test]
fn spectrogram_is_non_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<f64> = (0..200).map(|_| rng.random::<f64>() - 0.5).collect();
    let img = spectrogram(&x, WindowSpec::hamming(32), 3, 64, FS).unwrap();
    assert!(img.values.as_slice().iter().all(|&v| v >= 0.0));
}

#[test]
fn wigner_ville_time_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<f64> = (0..256).map(|_| rng.random::<f64>() - 0.5).collect();
    let z = analytic_signal(&x).unwrap();
    let (img, diag) = wigner_ville(&z, N_FFT, FS).unwrap();
    assert!(diag.max_imag_residue < 1e-9);
    for t in 0..z.len() {
        let marginal: f64 = img.values.row(t).iter().sum::<f64>() / N_FFT as f64;
        assert!((marginal - z[t].norm_sqr()).abs() < 1e-6, "row {t}");
    }
}

#[test]
fn time_shift_covariance() {
    let n = 512;
    let burst = |offset: usize| -> Vec<Complex<f64>> {
        (0..n)
            .map(|i| {
                if (192 + offset..320 + offset).contains(&i) {
                    Complex::from_polar(1.0, 2.0 * PI * 0.11 * (i - offset) as f64)
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect()
    };
    let s = 17;
    let (z, zs) = (burst(0), burst(s));
    for method in TfdMethod::ALL {
        let k = kernel(method);
        let (a, _) = cohen_tfd(&z, &k, N_FFT, FS).unwrap();
        let (b, _) = cohen_tfd(&zs, &k, N_FFT, FS).unwrap();
        let scale = a.values.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rows = a.values.rows();
        for t in 0..rows - s {
            for f in 0..a.values.cols() {
                let diff = (a.values[(t, f)] - b.values[(t + s, f)]).abs();
                assert!(diff < 1e-6 * scale, "{method} row {t} bin {f}: {diff}");
            }
        }
    }
}

#[test]
fn all_methods_share_output_dims() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples = Matrix::from_fn(300, 2, |_, _| rng.random::<f64>() - 0.5);
    let seg = Segment {
        samples,
        fs: FS,
        class_id: 0,
        origin: SegmentOrigin { record: 0, start_sample: 0 },
    };
    for method in TfdMethod::ALL {
        let imgs = segment_to_images(&seg, &kernel(method), N_FFT, (32, 24)).unwrap();
        assert_eq!(imgs.len(), 2);
        assert!(imgs.iter().all(|i| i.dims() == (32, 24)), "{method}");
    }
}

#[test]
fn segment_images_follow_channel_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let base: Vec<f64> = (0..256).map(|_| rng.random::<f64>() - 0.5).collect();
    let samples = Matrix::from_fn(256, 3, |r, c| match c {
        0 | 1 => base[r],
        _ => 2.0 * base[r],
    });
    let seg = Segment {
        samples,
        fs: FS,
        class_id: 1,
        origin: SegmentOrigin { record: 0, start_sample: 0 },
    };
    let imgs = segment_to_images(&seg, &kernel(TfdMethod::Swv), N_FFT, (16, 16)).unwrap();
    assert_eq!(imgs[0], imgs[1]);
    let expected = imgs[0].values.scale(4.0);
    assert!(imgs[2].values.max_abs_diff(&expected) < 1e-9);

    let zero: Segment<f64> = Segment {
        samples: Matrix::zeros(128, 1),
        fs: FS,
        class_id: 0,
        origin: SegmentOrigin { record: 0, start_sample: 0 },
    };
    let imgs = segment_to_images(&zero, &kernel(TfdMethod::Gk), N_FFT, (8, 8)).unwrap();
    assert!(imgs[0].values.as_slice().iter().all(|&v| v == 0.0));
}

#[test]
fn spec_kernel_matches_spectrogram_path() {
    let x: Vec<f64> = (0..200).map(|i| (0.3 * i as f64).sin()).collect();
    let z = analytic_signal(&x).unwrap();
    let k = kernel(TfdMethod::Spec);
    let (a, _) = cohen_tfd(&z, &k, N_FFT, FS).unwrap();
    let b = spectrogram(&x, k.window, 1, N_FFT, FS).unwrap();
    assert_eq!(a, b);
}
