//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line each and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use superslice::baselines::{
    dwt, knn_classify, pca_fit, pca_inverse, pca_transform, svm_predict, svm_train, Extension, FeatureVector,
    SvmOptions, Wavelet,
};
use superslice::convnet::{init_network, loss_and_gradients, Architecture, Parameters};
use superslice::pipeline::{load_segments, rank_sweep_tensors, run_pipeline, segment_tensor, ExperimentConfig};
use superslice::signal::{analytic_signal, make_window, WindowSpec};
use superslice::tensor::{build_projector, cp_als, mode_n_product, super_slices, AlsOptions, CpFactors, CpResult, Mode};
use superslice::tfr::{channel_image, cohen_tfd, spectrogram, wigner_ville, KernelSpec, TfdMethod};
use superslice::Matrix;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| {
        let v: f64 = StandardNormal.sample(rng);
        v
    })
}

// ---------------------------------------------------------------- A1 / A2

struct RecoveryRun {
    results: Vec<CpResult<f64>>,
    elapsed: Duration,
}

fn recovery_run() -> RecoveryRun {
    let start = Instant::now();
    let results = (0..20u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let f = CpFactors::new(gaussian(&mut rng, 64, 8), gaussian(&mut rng, 64, 8), gaussian(&mut rng, 20, 8)).unwrap();
            let x = f.reconstruct();
            let opts = AlsOptions {
                n_restarts: 5,
                seed: 7 + i,
                ..Default::default()
            };
            cp_als(&x, 8, &opts).unwrap()
        })
        .collect();
    RecoveryRun {
        results,
        elapsed: start.elapsed(),
    }
}

fn a1(run: &RecoveryRun) -> Outcome {
    let recovered = run.results.iter().filter(|r| r.final_error() < 1e-6).count();
    let worst = run.results.iter().map(|r| r.final_error()).fold(0.0, f64::max);
    let secs = run.elapsed.as_secs_f64();
    outcome(
        recovered >= 19 && secs < 60.0,
        format!("{recovered}/20 below 1e-6 (worst {worst:.2e}), {secs:.1} s"),
    )
}

fn a2(run: &RecoveryRun) -> Outcome {
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    let mut traces = 0;
    for r in &run.results {
        for h in &r.restart_histories {
            traces += 1;
            for w in h.windows(2) {
                worst_rise = worst_rise.max(w[1] - w[0]);
            }
        }
    }
    outcome(
        worst_rise <= 1e-12,
        format!("{traces} restart traces, largest per-iteration increase {worst_rise:.2e}"),
    )
}

// ---------------------------------------------------------------- A3

fn a3() -> Outcome {
    let cfg = ExperimentConfig::default();
    let segments = load_segments::<f64>(&cfg).unwrap();
    let x = segment_tensor(&cfg, &segments[0]).unwrap();
    let ranks: Vec<usize> = (1..=20).collect();
    let curve = rank_sweep_tensors(&[x], &ranks, &AlsOptions::default()).unwrap();
    let violations = curve.windows(2).filter(|w| w[1].mean_error > w[0].mean_error).count();
    outcome(
        violations == 0,
        format!(
            "R=1 {:.4}, R=5 {:.4}, R=10 {:.4}, R=20 {:.4}; {violations} increases",
            curve[0].mean_error, curve[4].mean_error, curve[9].mean_error, curve[19].mean_error
        ),
    )
}

// ---------------------------------------------------------------- A4

fn tiny_gradients() -> (f64, Parameters<f64>, Duration) {
    let start = Instant::now();
    let arch = Architecture::with_layer_count(6, (2, 4, 4), 3, &[2], 8, 2).unwrap();
    assert_eq!(arch.blocks.len(), 1);
    let net = init_network::<f64>(&arch, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let x: Vec<Vec<f64>> = (0..4).map(|_| (0..32).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y = [0, 1, 1, 0];
    let (_, grads) = loss_and_gradients(&net, &x, &y).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (ti, t) in net.params.tensors.iter().enumerate() {
        for pi in 0..t.len() {
            let mut plus = net.clone();
            plus.params.tensors[ti][pi] += h;
            let mut minus = net.clone();
            minus.params.tensors[ti][pi] -= h;
            let numeric = (loss_and_gradients(&plus, &x, &y).unwrap().0 - loss_and_gradients(&minus, &x, &y).unwrap().0)
                / (2.0 * h);
            let analytic = grads.tensors[ti][pi];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    (worst, grads, start.elapsed())
}

fn a4(worst: f64, grads: &Parameters<f64>, elapsed: Duration) -> Outcome {
    let n: usize = grads.tensors.iter().map(Vec::len).sum();
    let secs = elapsed.as_secs_f64();
    outcome(
        worst < 1e-4 && secs < 10.0,
        format!("{n} parameters, worst relative error {worst:.2e}, {secs:.2} s"),
    )
}

// ---------------------------------------------------------------- A5

fn a5_config() -> ExperimentConfig {
    ExperimentConfig {
        repeats: 1,
        folds: 10,
        seed: 42,
        ..Default::default()
    }
}

fn a5(report: &superslice::pipeline::Report) -> Outcome {
    let mean = report.mean_accuracy.unwrap_or(0.0);
    outcome(
        report.complete && mean >= 0.90 && report.wall_time_s < 900.0,
        format!(
            "mean accuracy {mean:.4} over {} folds (min {:.3}), {:.0} s",
            report.accuracies().len(),
            report.overall.as_ref().map_or(f64::NAN, |s| s.min),
            report.wall_time_s
        ),
    )
}

// ---------------------------------------------------------------- A6

/// Orthonormal columns by modified Gram-Schmidt.
fn orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    let g = gaussian(rng, rows, cols);
    let mut q: Vec<Vec<f64>> = Vec::new();
    for j in 0..cols {
        let mut v = g.column(j);
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|a| a / n).collect());
    }
    Matrix::from_fn(rows, cols, |i, j| q[j][i])
}

fn a6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_pc, mut worst_rec): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let k = rng.random_range(1..=32usize);
        let r = rng.random_range(1..=8usize.min(k));
        // singular values in [1, 10]: condition number at most 10
        let u = orthonormal(&mut rng, k, r);
        let v = orthonormal(&mut rng, r, r);
        let s: Vec<f64> = (0..r).map(|_| rng.random_range(1.0..10.0)).collect();
        let c = Matrix::from_fn(k, r, |i, j| (0..r).map(|l| u[(i, l)] * s[l] * v[(j, l)]).sum());
        let p = build_projector(&c).unwrap();
        worst_pc = worst_pc.max(p.matrix().matmul(&c).unwrap().max_abs_diff(&Matrix::identity(r)));

        let (nt, nf) = (rng.random_range(2..8usize), rng.random_range(2..8usize));
        let x = CpFactors::new(gaussian(&mut rng, nt, r), gaussian(&mut rng, nf, r), c.clone())
            .unwrap()
            .reconstruct();
        let back = mode_n_product(&super_slices(&x, &p).unwrap(), &c, Mode::Three).unwrap();
        worst_rec = worst_rec.max(back.max_abs_diff(&x));
    }
    outcome(
        worst_pc < 1e-10 && worst_rec < 1e-8,
        format!("1000 matrices: max |PC - I| {worst_pc:.2e}, max reconstruction error {worst_rec:.2e}"),
    )
}

// ---------------------------------------------------------------- A7

fn a7() -> Outcome {
    let fs = 256.0;
    let n_fft = 64;
    let kernel = |m| KernelSpec::with_defaults(m, fs);
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut notes = Vec::new();
    let mut pass = true;

    // quadratic homogeneity
    let x: Vec<f64> = (0..300).map(|_| rng.random_range(-0.5..0.5)).collect();
    let a = 1.7;
    let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
    let mut worst_h: f64 = 0.0;
    for m in TfdMethod::ALL {
        let base = channel_image(&x, &kernel(m), n_fft, fs).unwrap();
        let scaled = channel_image(&ax, &kernel(m), n_fft, fs).unwrap();
        let expected = base.values.scale(a * a);
        let peak = expected.as_slice().iter().fold(1.0f64, |p, v| p.max(v.abs()));
        worst_h = worst_h.max(scaled.values.max_abs_diff(&expected) / peak);
    }
    pass &= worst_h < 1e-9;
    notes.push(format!("homogeneity {worst_h:.1e}"));

    // spectrogram per-frame Parseval: one-sided bins, interior weighted twice
    let win = WindowSpec::hanning(48);
    let w: Vec<f64> = make_window(win).unwrap();
    let hop = 5;
    let img = spectrogram(&x, win, hop, n_fft, fs).unwrap();
    let mut worst_p: f64 = 0.0;
    for t in 0..img.values.rows() {
        let frame: f64 = (0..48).map(|i| (x[t * hop + i] * w[i]).powi(2)).sum();
        let sum: f64 = (0..img.values.cols())
            .map(|k| img.values[(t, k)] * if k == 0 || k == n_fft / 2 { 1.0 } else { 2.0 })
            .sum();
        worst_p = worst_p.max((sum - n_fft as f64 * frame).abs());
    }
    pass &= worst_p < 1e-9;
    notes.push(format!("Parseval {worst_p:.1e}"));

    // WV time marginal: mean over bins equals |z|^2
    let z = analytic_signal(&x[..256]).unwrap();
    let (wv, _) = wigner_ville(&z, n_fft, fs).unwrap();
    let worst_m = (0..z.len())
        .map(|t| (wv.values.row(t).iter().sum::<f64>() / n_fft as f64 - z[t].norm_sqr()).abs())
        .fold(0.0, f64::max);
    pass &= worst_m < 1e-6;
    notes.push(format!("WV marginal {worst_m:.1e}"));

    // two tones at bins 4 and 12: WV cross-term ridge at bin 8 versus SWV
    let tones: Vec<Complex<f64>> = (0..512)
        .map(|i| {
            let t = i as f64;
            Complex::from_polar(1.0, 2.0 * PI * 4.0 / 128.0 * t) + Complex::from_polar(1.0, 2.0 * PI * 12.0 / 128.0 * t)
        })
        .collect();
    let ridge = |m| {
        let (img, _) = cohen_tfd(&tones, &kernel(m), n_fft, fs).unwrap();
        (128..384).map(|t| img.values[(t, 8)].abs()).fold(0.0, f64::max)
    };
    let ratio = ridge(TfdMethod::Wv) / ridge(TfdMethod::Swv);
    pass &= ratio >= 2.0;
    notes.push(format!("cross-term ratio {ratio:.1}"));

    let (direct, _) = wigner_ville(&z, n_fft, fs).unwrap();
    let (via_kernel, _) = cohen_tfd(&z, &kernel(TfdMethod::Wv), n_fft, fs).unwrap();
    let identical = direct
        .values
        .as_slice()
        .iter()
        .zip(via_kernel.values.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    pass &= identical;
    notes.push(format!("WV kernel bit-exact {identical}"));

    outcome(pass, notes.join(", "))
}

// ---------------------------------------------------------------- A8

fn a8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let mut pass = true;
    let mut notes = Vec::new();

    let rows = Matrix::from_fn(40, 9, |_, _| rng.random_range(-2.0..2.0));
    let model = pca_fit(&rows, 9).unwrap();
    let back = pca_inverse(&model, &pca_transform(&model, &rows).unwrap()).unwrap();
    let pca_err = back.max_abs_diff(&rows);
    pass &= pca_err < 1e-9;
    notes.push(format!("PCA round trip {pca_err:.1e}"));

    let x: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
    let e: f64 = x.iter().map(|v| v * v).sum();
    let bands = dwt(&x, 6, Wavelet::Haar, Extension::Periodic).unwrap();
    let eb: f64 = bands.iter().flatten().map(|v| v * v).sum();
    pass &= (eb - e).abs() < 1e-10;
    notes.push(format!("Haar Parseval {:.1e}", (eb - e).abs()));

    // two classes on either side of the line x + y = 0 with a margin
    let data: Vec<FeatureVector<f64>> = (0..120)
        .map(|i| {
            let label = i % 2;
            let side = if label == 1 { 1.0 } else { -1.0 };
            let along: f64 = side * rng.random_range(1.0..4.0);
            let across: f64 = rng.random_range(-3.0..3.0);
            FeatureVector::new(vec![(along + across) / 2f64.sqrt(), (along - across) / 2f64.sqrt()], label).unwrap()
        })
        .collect();
    let knn_hits = data.iter().filter(|f| knn_classify(&data, 1, &f.values).unwrap() == f.label).count();
    pass &= knn_hits == data.len();
    notes.push(format!("KNN self {knn_hits}/{}", data.len()));

    let svm = svm_train(&data, &SvmOptions::default()).unwrap();
    let svm_hits = data.iter().filter(|f| svm_predict(&svm, &f.values).unwrap() == f.label).count();
    pass &= svm_hits == data.len();
    notes.push(format!("SVM training {svm_hits}/{}", data.len()));

    outcome(pass, notes.join(", "))
}

// ---------------------------------------------------------------- A9

fn factor_bytes(run: &RecoveryRun) -> Vec<u64> {
    run.results
        .iter()
        .flat_map(|r| {
            let f = &r.factors;
            f.a.as_slice()
                .iter()
                .chain(f.b.as_slice())
                .chain(f.c.as_slice())
                .chain(&r.error_history)
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        })
        .collect()
}

fn param_bytes(p: &Parameters<f64>) -> Vec<u64> {
    p.tensors.iter().flatten().map(|v| v.to_bits()).collect()
}

fn main() {
    let mut results: Vec<(&str, &str, Outcome)> = Vec::new();

    let recovery = recovery_run();
    results.push(("A1", "CP exact-rank recovery", a1(&recovery)));
    results.push(("A2", "ALS monotonicity", a2(&recovery)));
    results.push(("A3", "rank-sweep shape", a3()));
    let (worst, grads, elapsed) = tiny_gradients();
    results.push(("A4", "gradient fidelity", a4(worst, &grads, elapsed)));
    let report = run_pipeline::<f64>(&a5_config()).unwrap();
    results.push(("A5", "end-to-end synthetic classification", a5(&report)));
    results.push(("A6", "projector identities", a6()));
    results.push(("A7", "time-frequency invariants", a7()));
    results.push(("A8", "baseline sanity", a8()));

    let same_a1 = factor_bytes(&recovery) == factor_bytes(&recovery_run());
    let (worst2, grads2, _) = tiny_gradients();
    let same_a4 = worst.to_bits() == worst2.to_bits() && param_bytes(&grads) == param_bytes(&grads2);
    let report2 = run_pipeline::<f64>(&a5_config()).unwrap();
    let same_a5 = report.to_json_without_timing() == report2.to_json_without_timing();
    results.push((
        "A9",
        "determinism",
        outcome(
            same_a1 && same_a4 && same_a5,
            format!("recovery {same_a1}, gradients {same_a4}, classification report {same_a5}"),
        ),
    ));

    let mut failed = 0;
    for (id, name, o) in &results {
        println!("{} {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
