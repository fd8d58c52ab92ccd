//! Quality metrics: MSE, PSNR, SSIM on 2-D buffers and SNR on signals.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Signal;

/// Finite dB stand-in for `+inf` in machine-readable reports.
pub const SATURATED_DB: f64 = 999.0;

pub fn saturate_db(db: f64) -> f64 {
    if db.is_nan() {
        db
    } else {
        db.clamp(-SATURATED_DB, SATURATED_DB)
    }
}

/// Row-major 2-D array of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer<T: Real> {
    rows: usize,
    cols: usize,
    pixels: Vec<T>,
}

impl<T: Real> ImageBuffer<T> {
    pub fn new(rows: usize, cols: usize, pixels: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("empty image {rows}x{cols}")));
        }
        if pixels.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite pixel".into()));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let pixels = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(rows, cols, pixels)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.pixels[r * self.cols + c]
    }

    pub fn max(&self) -> T {
        self.pixels
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.pixels.iter().copied().fold(T::infinity(), T::min)
    }
}

fn same_shape<T: Real>(f: &ImageBuffer<T>, g: &ImageBuffer<T>) -> Result<()> {
    if f.rows != g.rows || f.cols != g.cols {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            f.rows, f.cols, g.rows, g.cols
        )));
    }
    Ok(())
}

pub fn mse<T: Real>(f: &ImageBuffer<T>, g: &ImageBuffer<T>) -> Result<T> {
    same_shape(f, g)?;
    let mut acc = T::zero();
    for (&a, &b) in f.pixels.iter().zip(&g.pixels) {
        let d = a - b;
        acc += d * d;
    }
    Ok(acc / T::from_usize_lossy(f.pixels.len()))
}

/// `10 log10(max_f^2 / MSE)`, `+inf` for identical images.
pub fn psnr<T: Real>(f: &ImageBuffer<T>, g: &ImageBuffer<T>, max_f: T) -> Result<T> {
    if !(max_f > T::zero() && max_f.is_finite()) {
        return Err(Error::InvalidParameter(format!("MAX_f must be positive, got {max_f}")));
    }
    let m = mse(f, g)?;
    if m == T::zero() {
        return Ok(T::infinity());
    }
    Ok(T::lit(10.0) * (max_f * max_f / m).log10())
}

/// PSNR with `MAX_f` taken from the reference image `f`.
pub fn psnr_auto<T: Real>(f: &ImageBuffer<T>, g: &ImageBuffer<T>) -> Result<T> {
    let peak = f.max();
    if !(peak > T::zero()) {
        return Err(Error::Degenerate(format!(
            "reference maximum {peak} cannot serve as MAX_f"
        )));
    }
    psnr(f, g, peak)
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConstants<T: Real> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

impl<T: Real> SsimConstants<T> {
    pub fn for_range(dynamic_range: T) -> Self {
        let c1 = (T::lit(SSIM_K1) * dynamic_range).powi(2);
        let c2 = (T::lit(SSIM_K2) * dynamic_range).powi(2);
        Self {
            c1,
            c2,
            c3: c2 / T::lit(2.0),
        }
    }
}

/// Luminance, contrast and structure terms from first and second moments.
fn lcs<T: Real>(mu_f: T, mu_g: T, var_f: T, var_g: T, cov: T, k: &SsimConstants<T>) -> T {
    let two = T::lit(2.0);
    let var_f = var_f.max(T::zero());
    let var_g = var_g.max(T::zero());
    let (sd_f, sd_g) = (var_f.sqrt(), var_g.sqrt());
    let l = (two * mu_f * mu_g + k.c1) / (mu_f * mu_f + mu_g * mu_g + k.c1);
    let c = (two * sd_f * sd_g + k.c2) / (var_f + var_g + k.c2);
    let s = (cov + k.c3) / (sd_f * sd_g + k.c3);
    l * c * s
}

fn check_range<T: Real>(dynamic_range: T) -> Result<()> {
    if dynamic_range > T::zero() && dynamic_range.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "SSIM dynamic range must be positive, got {dynamic_range}"
        )))
    }
}

/// SSIM from whole-image statistics (a single window covering everything).
pub fn ssim_global<T: Real>(f: &ImageBuffer<T>, g: &ImageBuffer<T>, dynamic_range: T) -> Result<T> {
    same_shape(f, g)?;
    check_range(dynamic_range)?;
    let n = T::from_usize_lossy(f.pixels.len());
    let mu_f = f.pixels.iter().copied().sum::<T>() / n;
    let mu_g = g.pixels.iter().copied().sum::<T>() / n;
    let (mut vf, mut vg, mut cov) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in f.pixels.iter().zip(&g.pixels) {
        let (da, db) = (a - mu_f, b - mu_g);
        vf += da * da;
        vg += db * db;
        cov += da * db;
    }
    let k = SsimConstants::for_range(dynamic_range);
    Ok(lcs(mu_f, mu_g, vf / n, vg / n, cov / n, &k))
}

fn gaussian_window<T: Real>() -> Vec<T> {
    let half = (SSIM_WINDOW / 2) as f64;
    let g1: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let total: f64 = g1.iter().sum::<f64>().powi(2);
    g1.iter()
        .flat_map(|&a| g1.iter().map(move |&b| T::lit(a * b / total)))
        .collect()
}

/// Mean SSIM over every 11x11 Gaussian-weighted (sigma 1.5) window that fits
/// inside the image. Images smaller than the window fall back to
/// [`ssim_global`].
pub fn ssim<T: Real>(f: &ImageBuffer<T>, g: &ImageBuffer<T>, dynamic_range: T) -> Result<T> {
    same_shape(f, g)?;
    check_range(dynamic_range)?;
    if f.rows < SSIM_WINDOW || f.cols < SSIM_WINDOW {
        return ssim_global(f, g, dynamic_range);
    }
    let w = gaussian_window::<T>();
    let k = SsimConstants::for_range(dynamic_range);
    let mut total = T::zero();
    let mut count = 0usize;
    for r0 in 0..=f.rows - SSIM_WINDOW {
        for c0 in 0..=f.cols - SSIM_WINDOW {
            let (mut mf, mut mg, mut ff, mut gg, mut fg) =
                (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
            for i in 0..SSIM_WINDOW {
                for j in 0..SSIM_WINDOW {
                    let wt = w[i * SSIM_WINDOW + j];
                    let a = f.get(r0 + i, c0 + j);
                    let b = g.get(r0 + i, c0 + j);
                    mf += wt * a;
                    mg += wt * b;
                    ff += wt * a * a;
                    gg += wt * b * b;
                    fg += wt * a * b;
                }
            }
            total += lcs(mf, mg, ff - mf * mf, gg - mg * mg, fg - mf * mg, &k);
            count += 1;
        }
    }
    Ok(total / T::from_usize_lossy(count))
}

/// How SNR is measured for a signal.
#[derive(Debug, Clone)]
pub enum SnrSpec<'a, T: Real> {
    /// Power ratio against a known clean signal: `10 log10(sum c^2 / sum (s - c)^2)`.
    Reference(&'a [T]),
    /// Amplitude ratio without a reference:
    /// `20 log10(peak |s[signal]| / std(s[noise]))`.
    Region {
        signal_window: Range<usize>,
        noise_window: Range<usize>,
    },
}

pub fn snr_db<T: Real>(signal: &Signal<T>, spec: &SnrSpec<'_, T>) -> Result<f64> {
    let s = signal.samples();
    match spec {
        SnrSpec::Reference(clean) => {
            if clean.len() != s.len() {
                return Err(Error::DimensionMismatch(format!(
                    "signal has {} samples, reference {}",
                    s.len(),
                    clean.len()
                )));
            }
            Ok(reference_snr_db(s, clean))
        }
        SnrSpec::Region {
            signal_window,
            noise_window,
        } => {
            for (name, w) in [("signal", signal_window), ("noise", noise_window)] {
                if w.is_empty() || w.end > s.len() {
                    return Err(Error::InvalidParameter(format!(
                        "{name} window {w:?} is empty or outside 0..{}",
                        s.len()
                    )));
                }
            }
            if signal_window.start < noise_window.end && noise_window.start < signal_window.end {
                return Err(Error::InvalidParameter(format!(
                    "signal window {signal_window:?} overlaps noise window {noise_window:?}"
                )));
            }
            let peak = s[signal_window.clone()]
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.as_f64().abs()));
            let noise = &s[noise_window.clone()];
            let n = noise.len() as f64;
            let mean = noise.iter().map(|v| v.as_f64()).sum::<f64>() / n;
            let var = noise.iter().map(|v| (v.as_f64() - mean).powi(2)).sum::<f64>() / n;
            Ok(20.0 * (peak / var.sqrt()).log10())
        }
    }
}

/// Reference-mode SNR over raw slices, accumulated in `f64`.
pub fn reference_snr_db<T: Real>(signal: &[T], clean: &[T]) -> f64 {
    let (mut p, mut e) = (0.0_f64, 0.0_f64);
    for (&x, &c) in signal.iter().zip(clean) {
        let c = c.as_f64();
        let d = x.as_f64() - c;
        p += c * c;
        e += d * d;
    }
    if e == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (p / e).log10()
}

/// `20 log10(max |clean| / rms(signal - clean))`.
pub fn peak_snr_db<T: Real>(signal: &[T], clean: &[T]) -> f64 {
    let peak = clean.iter().fold(0.0_f64, |m, v| m.max(v.as_f64().abs()));
    let e = signal
        .iter()
        .zip(clean)
        .map(|(&x, &c)| (x.as_f64() - c.as_f64()).powi(2))
        .sum::<f64>()
        / signal.len().max(1) as f64;
    if e == 0.0 {
        return f64::INFINITY;
    }
    20.0 * (peak / e.sqrt()).log10()
}
