//! Daubechies orthogonal filter banks.
//!
//! Taps come from spectral factorization of the Daubechies half-band
//! polynomial `P(y) = sum_k C(V-1+k, k) y^k`, `y = sin^2(w/2)`, keeping the
//! minimum-phase factor. The raw factorization is then polished with Newton
//! steps on the orthonormality and vanishing-moment equations so that every
//! supported order meets the invariants at double precision.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::Real;

pub const MIN_ORDER: usize = 1;
pub const MAX_ORDER: usize = 20;

/// Orthogonal two-channel analysis/synthesis filter pair.
///
/// `highpass[k] = (-1)^k * lowpass[L-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter<T: Real> {
    name: String,
    lowpass: Vec<T>,
    highpass: Vec<T>,
}

impl<T: Real> WaveletFilter<T> {
    /// Builds a filter from lowpass taps, deriving the highpass by the QMF
    /// relation. The taps are not checked for orthogonality.
    pub fn from_lowpass(name: impl Into<String>, lowpass: Vec<T>) -> Result<Self> {
        if lowpass.len() < 2 || lowpass.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "orthogonal lowpass needs an even number of taps, got {}",
                lowpass.len()
            )));
        }
        let highpass = qmf(&lowpass);
        Ok(Self {
            name: name.into(),
            lowpass,
            highpass,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lowpass(&self) -> &[T] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[T] {
        &self.highpass
    }

    pub fn taps(&self) -> usize {
        self.lowpass.len()
    }
}

fn qmf<T: Real>(lowpass: &[T]) -> Vec<T> {
    let n = lowpass.len();
    (0..n)
        .map(|k| {
            let v = lowpass[n - 1 - k];
            if k % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Daubechies filter with `vanishing_moments` vanishing moments (`2V` taps).
pub fn make_daubechies_filter<T: Real>(vanishing_moments: usize) -> Result<WaveletFilter<T>> {
    let taps = daubechies_taps(vanishing_moments)?;
    WaveletFilter::from_lowpass(
        format!("db{vanishing_moments}"),
        taps.into_iter().map(T::lit).collect(),
    )
}

/// Resolves names of the form `dbN` (case-insensitive), plus `haar`.
pub fn wavelet_by_name<T: Real>(name: &str) -> Result<WaveletFilter<T>> {
    let lower = name.trim().to_ascii_lowercase();
    if lower == "haar" {
        return make_daubechies_filter(1);
    }
    let order = lower
        .strip_prefix("db")
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::InvalidParameter(format!("unknown wavelet '{name}'")))?;
    make_daubechies_filter(order)
}

/// Daubechies lowpass taps in `f64`, minimum-phase ordering
/// (`db2 = [0.4830, 0.8365, 0.2241, -0.1294]`).
pub fn daubechies_taps(vanishing_moments: usize) -> Result<Vec<f64>> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&vanishing_moments) {
        return Err(Error::UnsupportedOrder(vanishing_moments));
    }
    let v = vanishing_moments;
    if v == 1 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        return Ok(vec![h, h]);
    }

    // P(y) = sum_{k<V} C(V-1+k, k) y^k
    let mut p = Vec::with_capacity(v);
    let mut binom = 1.0_f64;
    for k in 0..v {
        if k > 0 {
            binom = binom * (v - 1 + k) as f64 / k as f64;
        }
        p.push(binom);
    }

    // y = (2 - z - 1/z) / 4  =>  z^2 - (2 - 4y) z + 1 = 0; keep |z| < 1.
    let z_roots: Vec<Complex64> = poly::roots(&p)
        .into_iter()
        .map(|y| {
            let b = Complex64::new(2.0, 0.0) - 4.0 * y;
            let disc = (b * b - 4.0).sqrt();
            let z1 = (b + disc) / 2.0;
            let z2 = (b - disc) / 2.0;
            if z1.norm() < z2.norm() {
                z1
            } else {
                z2
            }
        })
        .collect();

    // Multiply (1 + z)^V and the minimum-phase factors, pairing conjugates
    // into real quadratics. Coefficients are kept in descending powers of z.
    let mut h = vec![1.0];
    for _ in 0..v {
        h = poly::multiply(&h, &[1.0, 1.0]);
    }
    let mut used = vec![false; z_roots.len()];
    for i in 0..z_roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let zi = z_roots[i];
        if zi.im.abs() < 1e-9 * zi.norm().max(1.0) {
            h = poly::multiply(&h, &[1.0, -zi.re]);
            continue;
        }
        let partner = (0..z_roots.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                let da = (z_roots[a] - zi.conj()).norm();
                let db = (z_roots[b] - zi.conj()).norm();
                da.partial_cmp(&db).unwrap()
            })
            .expect("complex roots of a real polynomial come in conjugate pairs");
        used[partner] = true;
        h = poly::multiply(&h, &[1.0, -2.0 * zi.re, zi.norm_sqr()]);
    }

    let sum: f64 = h.iter().sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    let mut h: Vec<f64> = h.iter().map(|&c| c * scale).collect();
    polish(&mut h, v);
    Ok(h)
}

/// Newton refinement of the orthonormality system
/// `sum_k h[k] h[k+2m] = delta_m` (m = 0..V-1) together with the vanishing
/// moment conditions `sum_k (-1)^k k^p h[k] = 0` (p = 0..V-1) on centered,
/// scaled indices. Starts from the factorization, which is already close.
fn polish(h: &mut [f64], v: usize) {
    let n = 2 * v;
    let center = (n as f64 - 1.0) / 2.0;
    let scale = center.max(1.0);
    let t: Vec<f64> = (0..n).map(|k| (k as f64 - center) / scale).collect();

    let residual = |h: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(n);
        for m in 0..v {
            let mut acc = 0.0;
            for k in 0..n - 2 * m {
                acc += h[k] * h[k + 2 * m];
            }
            r.push(if m == 0 { acc - 1.0 } else { acc });
        }
        for p in 0..v {
            let mut acc = 0.0;
            for k in 0..n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * t[k].powi(p as i32) * h[k];
            }
            r.push(acc);
        }
        r
    };

    for _ in 0..8 {
        let r = residual(h);
        let norm = r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if norm < 1e-15 {
            break;
        }
        let mut jac = vec![vec![0.0; n]; n];
        for m in 0..v {
            for k in 0..n {
                let mut d = 0.0;
                if k + 2 * m < n {
                    d += h[k + 2 * m];
                }
                if k >= 2 * m {
                    d += h[k - 2 * m];
                }
                jac[m][k] = d;
            }
        }
        for p in 0..v {
            for k in 0..n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                jac[v + p][k] = sign * t[k].powi(p as i32);
            }
        }
        let Some(step) = solve(jac, r) else { break };
        let before = norm;
        let candidate: Vec<f64> = h.iter().zip(&step).map(|(a, d)| a - d).collect();
        let after = residual(&candidate)
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        if after >= before {
            break;
        }
        h.copy_from_slice(&candidate);
    }
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
