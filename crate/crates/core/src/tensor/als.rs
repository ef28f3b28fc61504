use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dense::{unfold, Mode, Tensor3};
use super::factors::{normalized_error, CpFactors};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd_right, symmetric_eigen};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Below this normalized error the objective is recomputed from a dense
/// reconstruction instead of the Gram-matrix shortcut, whose cancellation
/// error would otherwise dominate near exact fits.
const DIRECT_ERROR_BELOW: f64 = 1e-2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlsInit {
    #[default]
    Random,
    /// Leading left singular vectors of each unfolding for the first restart,
    /// random for the rest.
    UnfoldingSvd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlsOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub n_restarts: usize,
    pub seed: u64,
    pub init: AlsInit,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tol: 1e-8,
            n_restarts: 5,
            seed: 0,
            init: AlsInit::Random,
        }
    }
}

impl AlsOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 {
            return Err(Error::invalid("n_restarts must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CpResult<T> {
    /// Canonicalized factors of the best restart.
    pub factors: CpFactors<T>,
    /// Objective of the best restart: the starting point then one value per
    /// iteration.
    pub error_history: Vec<T>,
    /// Objective traces of every restart, in restart order.
    pub restart_histories: Vec<Vec<T>>,
    pub best_restart: usize,
    /// True if any normal-equation solve needed the singular-Gram ridge.
    pub ridged: bool,
}

impl<T: Scalar> CpResult<T> {
    pub fn final_error(&self) -> T {
        *self.error_history.last().expect("history is never empty")
    }
}

/// Rank-`R` CP decomposition by alternating least squares with seeded
/// restarts; the restart with the lowest final error wins.
pub fn cp_als<T: Scalar>(x: &Tensor3<T>, rank: usize, opts: &AlsOptions) -> Result<CpResult<T>> {
    check_inputs(x, rank, opts)?;
    let (nt, nf, nk) = x.dims();
    let mut runs = Vec::with_capacity(opts.n_restarts);
    for restart in 0..opts.n_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(restart as u64);
        let init = if restart == 0 && opts.init == AlsInit::UnfoldingSvd {
            CpFactors {
                a: leading_vectors(x, Mode::One, rank, &mut rng)?,
                b: leading_vectors(x, Mode::Two, rank, &mut rng)?,
                c: leading_vectors(x, Mode::Three, rank, &mut rng)?,
            }
        } else {
            CpFactors {
                a: random_matrix(nt, rank, &mut rng),
                b: random_matrix(nf, rank, &mut rng),
                c: random_matrix(nk, rank, &mut rng),
            }
        };
        runs.push(run_als(x, init, opts)?);
    }
    Ok(pick_best(runs))
}

/// Runs ALS from caller-supplied starting factors. Every restart after the
/// first perturbs the start with seeded noise scaled to the factor norms.
pub fn cp_als_from<T: Scalar>(x: &Tensor3<T>, start: &CpFactors<T>, opts: &AlsOptions) -> Result<CpResult<T>> {
    check_inputs(x, start.rank(), opts)?;
    if start.dims() != x.dims() {
        return Err(Error::dims(format!(
            "starting factors describe {:?}, tensor is {:?}",
            start.dims(),
            x.dims()
        )));
    }
    let mut runs = Vec::with_capacity(opts.n_restarts);
    for restart in 0..opts.n_restarts {
        let init = if restart == 0 {
            start.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(restart as u64);
            let jitter = |m: &Matrix<T>, rng: &mut ChaCha8Rng| {
                let scale = m.frobenius_norm() / T::c((m.rows() * m.cols()) as f64).sqrt();
                let noise = random_matrix(m.rows(), m.cols(), rng);
                Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] + scale * noise[(i, j)])
            };
            CpFactors {
                a: jitter(&start.a, &mut rng),
                b: jitter(&start.b, &mut rng),
                c: jitter(&start.c, &mut rng),
            }
        };
        runs.push(run_als(x, init, opts)?);
    }
    Ok(pick_best(runs))
}

fn check_inputs<T: Scalar>(x: &Tensor3<T>, rank: usize, opts: &AlsOptions) -> Result<()> {
    opts.validate()?;
    if rank == 0 {
        return Err(Error::invalid("CP rank must be at least 1"));
    }
    if x.frobenius_norm() == T::zero() {
        return Err(Error::ZeroTensor);
    }
    Ok(())
}

struct Run<T> {
    factors: CpFactors<T>,
    history: Vec<T>,
    ridged: bool,
}

fn pick_best<T: Scalar>(runs: Vec<Run<T>>) -> CpResult<T> {
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if *r.history.last().unwrap() < *runs[best].history.last().unwrap() {
            best = i;
        }
    }
    let ridged = runs.iter().any(|r| r.ridged);
    let restart_histories: Vec<Vec<T>> = runs.iter().map(|r| r.history.clone()).collect();
    let winner = runs.into_iter().nth(best).unwrap();
    let mut factors = winner.factors;
    factors.canonicalize();
    CpResult {
        factors,
        error_history: winner.history,
        restart_histories,
        best_restart: best,
        ridged,
    }
}

fn random_matrix<T: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| {
        let v: f64 = StandardNormal.sample(rng);
        T::c(v)
    })
}

/// Leading `rank` eigenvectors of `X₍ₙ₎X₍ₙ₎ᵀ`; columns beyond the mode size are random.
fn leading_vectors<T: Scalar>(x: &Tensor3<T>, mode: Mode, rank: usize, rng: &mut ChaCha8Rng) -> Result<Matrix<T>> {
    let u = unfold(x, mode);
    let g = u.transpose().gram();
    let (_, vecs) = symmetric_eigen(&g)?;
    let n = u.rows();
    let fill = random_matrix::<T>(n, rank, rng);
    Ok(Matrix::from_fn(n, rank, |i, j| if j < n { vecs[(i, j)] } else { fill[(i, j)] }))
}

/// `U[t,f,:] = X[t,f,:] · C`, a `T·F × R` matrix.
fn contract_channels<T: Scalar>(x: &Tensor3<T>, c: &Matrix<T>) -> Matrix<T> {
    let (nt, nf, _) = x.dims();
    let r = c.cols();
    let mut u = Matrix::zeros(nt * nf, r);
    for t in 0..nt {
        for f in 0..nf {
            let row = u.row_mut(t * nf + f);
            for (k, &xv) in x.channel_fiber(t, f).iter().enumerate() {
                for (o, &cv) in row.iter_mut().zip(c.row(k)) {
                    *o += xv * cv;
                }
            }
        }
    }
    u
}

fn hadamard3<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, c: &Matrix<T>) -> Matrix<T> {
    a.hadamard(b).and_then(|m| m.hadamard(c)).expect("equal R×R shapes")
}

fn run_als<T: Scalar>(x: &Tensor3<T>, init: CpFactors<T>, opts: &AlsOptions) -> Result<Run<T>> {
    let (nt, nf, nk) = x.dims();
    let r = init.rank();
    let norm_x2 = x.as_slice().iter().map(|&v| v * v).sum::<T>();
    let CpFactors { mut a, mut b, mut c } = init;
    let mut ridged = false;
    let mut history = vec![normalized_error(x, &CpFactors { a: a.clone(), b: b.clone(), c: c.clone() })?];
    let rel_tol = T::c(opts.rel_tol);

    for _ in 0..opts.max_iters {
        let (gb, gc) = (b.gram(), c.gram());

        // A and B share the channel contraction because C is fixed for both.
        let u = contract_channels(x, &c);
        let mut ma = Matrix::zeros(nt, r);
        for t in 0..nt {
            let row = ma.row_mut(t);
            for f in 0..nf {
                for ((o, &uv), &bv) in row.iter_mut().zip(u.row(t * nf + f)).zip(b.row(f)) {
                    *o += uv * bv;
                }
            }
        }
        let (new_a, ra) = solve_spd_right(&ma, &gb.hadamard(&gc)?)?;
        a = new_a;
        let ga_new = a.gram();

        let mut mb = Matrix::zeros(nf, r);
        for t in 0..nt {
            let at = a.row(t);
            for f in 0..nf {
                for ((o, &uv), &av) in mb.row_mut(f).iter_mut().zip(u.row(t * nf + f)).zip(at) {
                    *o += uv * av;
                }
            }
        }
        let (new_b, rb) = solve_spd_right(&mb, &ga_new.hadamard(&gc)?)?;
        b = new_b;
        let gb_new = b.gram();

        let mut mc = Matrix::zeros(nk, r);
        let mut w = vec![T::zero(); r];
        for t in 0..nt {
            let at = a.row(t);
            for f in 0..nf {
                for (wj, (&av, &bv)) in w.iter_mut().zip(at.iter().zip(b.row(f))) {
                    *wj = av * bv;
                }
                for (k, &xv) in x.channel_fiber(t, f).iter().enumerate() {
                    for (o, &wv) in mc.row_mut(k).iter_mut().zip(&w) {
                        *o += xv * wv;
                    }
                }
            }
        }
        let (new_c, rc) = solve_spd_right(&mc, &ga_new.hadamard(&gb_new)?)?;
        c = new_c;
        ridged |= ra || rb || rc;

        let inner: T = c.as_slice().iter().zip(mc.as_slice()).map(|(&p, &q)| p * q).sum();
        let model2: T = hadamard3(&ga_new, &gb_new, &c.gram()).as_slice().iter().copied().sum();
        let fast = ((norm_x2 - T::c(2.0) * inner + model2) / norm_x2).max(T::zero()).sqrt();
        let err = if fast >= T::c(DIRECT_ERROR_BELOW) {
            fast
        } else {
            normalized_error(x, &CpFactors { a: a.clone(), b: b.clone(), c: c.clone() })?
        };
        let prev = *history.last().unwrap();
        history.push(err);
        if !err.is_finite() {
            return Err(Error::Stage {
                stage: "cp_als".into(),
                subject: format!("rank {r}"),
                message: "objective became non-finite".into(),
            });
        }
        if prev - err <= rel_tol * prev {
            break;
        }
    }
    Ok(Run {
        factors: CpFactors { a, b, c },
        history,
        ridged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_rank(dims: (usize, usize, usize), r: usize, seed: u64) -> (Tensor3<f64>, CpFactors<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CpFactors {
            a: random_matrix(dims.0, r, &mut rng),
            b: random_matrix(dims.1, r, &mut rng),
            c: random_matrix(dims.2, r, &mut rng),
        };
        (f.reconstruct(), f)
    }

    #[test]
    fn rank_one_outer_product_recovered() {
        let a = [1.0, 2.0, -1.0];
        let b = [0.5, 1.0, 3.0, -2.0];
        let c = [1.0, -1.0];
        let x = Tensor3::from_fn((3, 4, 2), |t, f, k| a[t] * b[f] * c[k]);
        let res = cp_als(&x, 1, &AlsOptions::default()).unwrap();
        assert!(res.final_error() < 1e-8);
        assert!(res.factors.reconstruct().max_abs_diff(&x) < 1e-8);
    }

    #[test]
    fn exact_rank_three_and_nesting() {
        let (x, _) = random_rank((10, 12, 8), 3, 7);
        let opts = AlsOptions { seed: 3, ..Default::default() };
        let r3 = cp_als(&x, 3, &opts).unwrap();
        assert!(r3.final_error() < 1e-6, "{}", r3.final_error());
        let r1 = cp_als(&x, 1, &opts).unwrap();
        assert!(r1.final_error() > r3.final_error());
        for h in &r3.restart_histories {
            assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn deterministic_and_svd_init() {
        let (x, _) = random_rank((6, 5, 4), 2, 1);
        let opts = AlsOptions { seed: 11, n_restarts: 2, ..Default::default() };
        let p = cp_als(&x, 2, &opts).unwrap();
        let q = cp_als(&x, 2, &opts).unwrap();
        assert_eq!(p.factors, q.factors);
        assert_eq!(p.error_history, q.error_history);
        let svd = AlsOptions { init: AlsInit::UnfoldingSvd, ..opts };
        assert!(cp_als(&x, 2, &svd).unwrap().final_error() < 1e-6);
        // rank above a mode size still works
        assert!(cp_als(&x, 7, &svd).is_ok());
    }

    #[test]
    fn warm_start_never_worse_than_start() {
        let (x, _) = random_rank((8, 7, 6), 4, 2);
        let opts = AlsOptions { seed: 5, n_restarts: 2, max_iters: 20, ..Default::default() };
        let base = cp_als(&x, 2, &opts).unwrap();
        let f = &base.factors;
        let pad = |m: &Matrix<f64>| Matrix::from_fn(m.rows(), 3, |i, j| if j < 2 { m[(i, j)] } else { 0.0 });
        let fill = |m: &Matrix<f64>| {
            let mut p = pad(m);
            for i in 0..p.rows() {
                p[(i, 2)] = 0.1 * (i as f64 + 1.0);
            }
            p
        };
        // new component starts with a zero A column, so the start equals the rank-2 fit
        let start = CpFactors::new(pad(&f.a), fill(&f.b), fill(&f.c)).unwrap();
        assert!((normalized_error(&x, &start).unwrap() - base.final_error()).abs() < 1e-12);
        let grown = cp_als_from(&x, &start, &opts).unwrap();
        assert!(grown.final_error() <= base.final_error() + 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = Tensor3::<f64>::zeros((2, 2, 2));
        assert!(matches!(cp_als(&x, 1, &AlsOptions::default()), Err(Error::ZeroTensor)));
        let y = Tensor3::from_fn((2, 2, 2), |_, _, _| 1.0);
        assert!(cp_als(&y, 0, &AlsOptions::default()).is_err());
        let bad = AlsOptions { n_restarts: 0, ..Default::default() };
        assert!(cp_als(&y, 1, &bad).is_err());
    }
}
