use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    Haar,
    /// Daubechies wavelet with four vanishing moments (8 taps).
    #[default]
    Db4,
}

/// Boundary handling for the filter bank.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// Wrap around; the transform is orthogonal for even lengths.
    Periodic,
    /// Half-sample mirror: `x1 x0 | x0 x1 … xn-1 | xn-1 xn-2`.
    #[default]
    Symmetric,
}

const DB4: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

impl Wavelet {
    fn lowpass<T: Scalar>(self) -> Vec<T> {
        match self {
            Wavelet::Haar => vec![T::FRAC_1_SQRT_2(); 2],
            Wavelet::Db4 => DB4.iter().map(|&v| T::c(v)).collect(),
        }
    }
}

fn extended<T: Scalar>(x: &[T], i: isize, ext: Extension) -> T {
    let n = x.len() as isize;
    let idx = match ext {
        Extension::Periodic => i.rem_euclid(n),
        Extension::Symmetric => {
            let p = i.rem_euclid(2 * n);
            if p < n {
                p
            } else {
                2 * n - 1 - p
            }
        }
    };
    x[idx as usize]
}

/// One analysis step; outputs have length `ceil(n/2)`.
fn analysis_step<T: Scalar>(x: &[T], lo: &[T], hi: &[T], ext: Extension) -> (Vec<T>, Vec<T>) {
    let half = x.len().div_ceil(2);
    let l = lo.len() as isize;
    let mut a = Vec::with_capacity(half);
    let mut d = Vec::with_capacity(half);
    for i in 0..half as isize {
        let base = 2 * i + 1 - (l - 1);
        let (mut sa, mut sd) = (T::zero(), T::zero());
        for k in 0..lo.len() {
            let v = extended(x, base + k as isize, ext);
            sa += lo[k] * v;
            sd += hi[k] * v;
        }
        a.push(sa);
        d.push(sd);
    }
    (a, d)
}

/// Mallat decomposition, returning `[cA_L, cD_L, …, cD_1]`.
pub fn dwt<T: Scalar>(x: &[T], levels: usize, wavelet: Wavelet, ext: Extension) -> Result<Vec<Vec<T>>> {
    if levels == 0 {
        return Err(Error::invalid("DWT needs at least one level"));
    }
    if levels >= usize::BITS as usize || x.len() < (1usize << levels) {
        return Err(Error::invalid(format!(
            "signal of length {} is too short for {levels} DWT levels",
            x.len()
        )));
    }
    let lo = wavelet.lowpass::<T>();
    let l = lo.len();
    let hi: Vec<T> = (0..l)
        .map(|k| if k % 2 == 0 { lo[l - 1 - k] } else { -lo[l - 1 - k] })
        .collect();
    let mut details = Vec::with_capacity(levels);
    let mut approx = x.to_vec();
    for _ in 0..levels {
        let (a, d) = analysis_step(&approx, &lo, &hi, ext);
        details.push(d);
        approx = a;
    }
    let mut bands = vec![approx];
    bands.extend(details.into_iter().rev());
    Ok(bands)
}

/// Mean, population standard deviation and mean power of each band, in band order.
pub fn dwt_features<T: Scalar>(bands: &[Vec<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(3 * bands.len());
    for b in bands {
        if b.is_empty() {
            out.extend([T::zero(); 3]);
            continue;
        }
        let n = T::from_usize_lossy(b.len());
        let mean = b.iter().copied().sum::<T>() / n;
        let var = b.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        let power = b.iter().map(|&v| v * v).sum::<T>() / n;
        out.extend([mean, var.sqrt(), power]);
    }
    out
}
