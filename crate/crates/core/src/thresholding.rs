//! Classical wavelet shrinkage: MAD noise estimation, the universal
//! (sqtwolog), SURE (rigrsure), heuristic SURE (heursure) and minimax
//! threshold rules, hard/soft shrinkage, and the per-level denoising pipeline.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Signal;
use crate::wavelet::{dwt, idwt, WaveletFilter};

/// Normal-consistency constant of the median absolute deviation.
pub const MAD_SCALE: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Sqtwolog,
    Rigrsure,
    Minimaxi,
    Heursure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shrinkage {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub kind: RuleKind,
    pub shrinkage: Shrinkage,
}

impl ThresholdRule {
    pub fn new(kind: RuleKind, shrinkage: Shrinkage) -> Self {
        Self { kind, shrinkage }
    }

    pub fn soft(kind: RuleKind) -> Self {
        Self::new(kind, Shrinkage::Soft)
    }
}

impl RuleKind {
    pub const ALL: [RuleKind; 4] = [
        RuleKind::Sqtwolog,
        RuleKind::Rigrsure,
        RuleKind::Minimaxi,
        RuleKind::Heursure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Sqtwolog => "sqtwolog",
            RuleKind::Rigrsure => "rigrsure",
            RuleKind::Minimaxi => "minimaxi",
            RuleKind::Heursure => "heursure",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown threshold rule '{s}'")))
    }
}

impl fmt::Display for Shrinkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shrinkage::Hard => "hard",
            Shrinkage::Soft => "soft",
        })
    }
}

impl FromStr for Shrinkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hard" => Ok(Shrinkage::Hard),
            "soft" => Ok(Shrinkage::Soft),
            _ => Err(Error::InvalidParameter(format!("unknown shrinkage mode '{s}'"))),
        }
    }
}

/// Per-level record of the noise scale and the threshold that was applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelThreshold<T: Real> {
    pub level: usize,
    pub sigma: T,
    pub lambda: T,
}

fn median_of_sorted<T: Real>(v: &[T]) -> T {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

fn total_cmp<T: Real>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// `median(|w|) / 0.6745`.
pub fn mad_sigma<T: Real>(coeffs: &[T]) -> Result<T> {
    if coeffs.is_empty() {
        return Err(Error::EmptyInput("MAD of an empty coefficient band"));
    }
    let mut mags: Vec<T> = coeffs.iter().map(|c| c.abs()).collect();
    mags.sort_unstable_by(total_cmp);
    Ok(median_of_sorted(&mags) / T::lit(MAD_SCALE))
}

/// Universal threshold `sigma * sqrt(2 ln n)`.
pub fn sqtwolog_threshold<T: Real>(sigma: T, n: usize) -> T {
    let n = n.max(1);
    sigma * (T::lit(2.0) * T::from_usize_lossy(n).ln()).sqrt()
}

/// Minimax threshold: 0 for `n <= 32`, else `sigma (0.3936 + 0.1829 log2 n)`.
pub fn minimax_threshold<T: Real>(sigma: T, n: usize) -> T {
    if n <= 32 {
        return T::zero();
    }
    let log2n = T::from_usize_lossy(n).ln() / T::LN_2();
    sigma * (T::lit(0.3936) + T::lit(0.1829) * log2n)
}

/// SURE-optimal threshold.
///
/// With `W` the ascending squares of `coeffs / sigma`, the risk of keeping
/// the threshold at `sqrt(W_b)` is
/// `R(b) = (N - 2b + sum_{i<=b} W_i + (N - b) W_b) / N` for `b = 1..=N`;
/// the smallest minimizing `b` wins.
pub fn sure_threshold<T: Real>(coeffs: &[T], sigma: T) -> Result<T> {
    if coeffs.is_empty() {
        return Err(Error::EmptyInput("SURE threshold of an empty coefficient band"));
    }
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "SURE threshold needs sigma > 0, got {sigma}"
        )));
    }
    let mut w: Vec<T> = coeffs
        .iter()
        .map(|&c| {
            let x = c / sigma;
            x * x
        })
        .collect();
    w.sort_unstable_by(total_cmp);

    let n = T::from_usize_lossy(w.len());
    let mut cumulative = T::zero();
    let mut best_risk = T::infinity();
    let mut best = 0;
    for (i, &wb) in w.iter().enumerate() {
        let b = T::from_usize_lossy(i + 1);
        cumulative += wb;
        let risk = (n - T::lit(2.0) * b + cumulative + (n - b) * wb) / n;
        if risk < best_risk {
            best_risk = risk;
            best = i;
        }
    }
    Ok(sigma * w[best].sqrt())
}

/// Heuristic SURE: falls back to the universal threshold when the band's
/// normalized excess energy `eta = (sum w^2 - N) / N` is below
/// `(log2 N)^1.5 / sqrt N`, otherwise takes the smaller of the two rules.
pub fn heursure_threshold<T: Real>(coeffs: &[T], sigma: T) -> Result<T> {
    let sure = sure_threshold(coeffs, sigma)?;
    let n = coeffs.len();
    let nf = T::from_usize_lossy(n);
    let energy: T = coeffs
        .iter()
        .map(|&c| {
            let x = c / sigma;
            x * x
        })
        .sum();
    let eta = (energy - nf) / nf;
    let crit = (nf.ln() / T::LN_2()).powf(T::lit(1.5)) / nf.sqrt();
    let universal = sqtwolog_threshold(sigma, n);
    if eta < crit {
        Ok(universal)
    } else {
        Ok(universal.min(sure))
    }
}

/// Keeps coefficients with `|w| > t`, zeroes the rest.
pub fn hard_threshold<T: Real>(coeffs: &[T], t: T) -> Vec<T> {
    coeffs
        .iter()
        .map(|&c| if c.abs() > t { c } else { T::zero() })
        .collect()
}

/// `sign(w) * max(|w| - t, 0)`.
pub fn soft_threshold<T: Real>(coeffs: &[T], t: T) -> Vec<T> {
    coeffs
        .iter()
        .map(|&c| {
            let m = c.abs() - t;
            if m > T::zero() {
                m.copysign(c)
            } else {
                T::zero()
            }
        })
        .collect()
}

pub fn shrink<T: Real>(coeffs: &[T], t: T, mode: Shrinkage) -> Vec<T> {
    match mode {
        Shrinkage::Hard => hard_threshold(coeffs, t),
        Shrinkage::Soft => soft_threshold(coeffs, t),
    }
}

/// Threshold for one detail band under `kind`, given the band's noise scale.
pub fn level_threshold<T: Real>(kind: RuleKind, coeffs: &[T], sigma: T) -> Result<T> {
    let n = coeffs.len();
    Ok(match kind {
        RuleKind::Sqtwolog => sqtwolog_threshold(sigma, n),
        RuleKind::Minimaxi => minimax_threshold(sigma, n),
        // A noiseless band has nothing to estimate a risk against.
        RuleKind::Rigrsure | RuleKind::Heursure if sigma <= T::zero() => T::zero(),
        RuleKind::Rigrsure => sure_threshold(coeffs, sigma)?,
        RuleKind::Heursure => heursure_threshold(coeffs, sigma)?,
    })
}

/// Decompose, shrink every detail band with its own MAD-estimated threshold,
/// leave the approximation untouched, reconstruct.
pub fn denoise_classic<T: Real>(
    signal: &Signal<T>,
    rule: ThresholdRule,
    wavelet: &WaveletFilter<T>,
    levels: usize,
) -> Result<(Signal<T>, Vec<LevelThreshold<T>>)> {
    let mut decomp = dwt(signal, wavelet, levels)?;
    let mut applied = Vec::with_capacity(levels);
    for (i, band) in decomp.details.iter_mut().enumerate() {
        let sigma = mad_sigma(band)?;
        let lambda = level_threshold(rule.kind, band, sigma)?;
        *band = shrink(band, lambda, rule.shrinkage);
        applied.push(LevelThreshold {
            level: i + 1,
            sigma,
            lambda,
        });
    }
    Ok((idwt(&decomp, wavelet)?, applied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::make_daubechies_filter;
    use proptest::prelude::*;

    /// Direct evaluation of every candidate risk, no prefix sums.
    fn sure_oracle(coeffs: &[f64], sigma: f64) -> f64 {
        let mut w: Vec<f64> = coeffs.iter().map(|c| (c / sigma) * (c / sigma)).collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = w.len() as f64;
        let mut best = (f64::INFINITY, 0usize);
        for b in 1..=w.len() {
            let mut s = 0.0;
            for wi in &w[..b] {
                s += wi;
            }
            let bf = b as f64;
            let r = (n - 2.0 * bf + s + (n - bf) * w[b - 1]) / n;
            if r < best.0 {
                best = (r, b);
            }
        }
        sigma * w[best.1 - 1].sqrt()
    }

    #[test]
    fn mad_examples() {
        assert_eq!(mad_sigma(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((mad_sigma::<f64>(&[0.6745, -0.6745, 0.6745]).unwrap() - 1.0).abs() < 1e-15);
        let v: f64 = mad_sigma(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((v - 2.5 / 0.6745).abs() < 1e-15);
        assert!((v - 3.706_449_221_645_663).abs() < 1e-12);
        assert!(matches!(mad_sigma::<f64>(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn sqtwolog_examples() {
        assert_eq!(sqtwolog_threshold(0.0, 77), 0.0);
        assert_eq!(sqtwolog_threshold(3.0, 1), 0.0);
        let v = sqtwolog_threshold(1.0, 1024);
        assert!((v - (2.0 * 1024f64.ln()).sqrt()).abs() < 1e-15);
        assert!((v - 3.723_297_411_059_034).abs() < 1e-12);
    }

    #[test]
    fn minimax_examples() {
        assert_eq!(minimax_threshold(5.0, 32), 0.0);
        assert!((minimax_threshold::<f64>(1.0, 1024) - 2.2226).abs() < 1e-12);
        assert_eq!(minimax_threshold(0.0, 1000), 0.0);
    }

    #[test]
    fn sure_sparse_fixture() {
        let c = [0.0, 0.0, 0.0, 1000.0];
        let t = sure_threshold(&c, 1.0).unwrap();
        assert_eq!(t, sure_oracle(&c, 1.0));
        // b = 1..3 give risks -1/4, -3/4, -5/4; b = 4 gives 1e6 / 4.
        assert_eq!(t, 0.0);
    }

    #[test]
    fn sure_single_coefficient() {
        for c in [0.3, -2.0, 7.5] {
            assert_eq!(sure_threshold(&[c], 1.0).unwrap(), sure_oracle(&[c], 1.0));
            assert!((sure_threshold(&[c], 1.0).unwrap() - f64::abs(c)).abs() < 1e-15);
        }
    }

    #[test]
    fn sure_scale_equivariance() {
        let c = [0.4, -1.3, 2.2, 0.05, -0.7, 5.0, 0.9];
        let base = sure_threshold(&c, 0.8).unwrap();
        let scaled: Vec<f64> = c.iter().map(|x| 3.0 * x).collect();
        let t = sure_threshold(&scaled, 2.4).unwrap();
        assert!((t - 3.0 * base).abs() < 1e-12);
    }

    #[test]
    fn sure_rejects_bad_inputs() {
        assert!(matches!(sure_threshold::<f64>(&[], 1.0), Err(Error::EmptyInput(_))));
        assert!(sure_threshold(&[1.0], 0.0).is_err());
    }

    #[test]
    fn heursure_sparse_uses_universal() {
        // N = 64, one unit spike among zeros: sum w^2 = 1, eta = -63/64,
        // crit = 6^1.5 / 8 = 1.837.
        let mut c = vec![0.0; 64];
        c[10] = 1.0;
        let t = heursure_threshold(&c, 1.0).unwrap();
        assert_eq!(t, sqtwolog_threshold(1.0, 64));
    }

    #[test]
    fn heursure_dense_takes_minimum() {
        // N = 16, every |w| = 3: eta = 8, crit = 4^1.5 / 4 = 2.
        // SURE risks R(b) = 9 + 7b/16 - 2b/16 ... minimized at b = 1, threshold 3;
        // universal = sqrt(2 ln 16) = 2.3548 < 3.
        let c: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 3.0 } else { -3.0 }).collect();
        let t = heursure_threshold(&c, 1.0).unwrap();
        let sure = sure_threshold(&c, 1.0).unwrap();
        let universal: f64 = sqtwolog_threshold(1.0, 16);
        assert_eq!(sure, 3.0);
        assert_eq!(t, universal.min(sure));
        assert_eq!(t, universal);

        // Same regime but with the SURE threshold below the universal one.
        let mut c: Vec<f64> = vec![0.1; 60];
        c.extend([20.0, -18.0, 25.0, 30.0]);
        let sure = sure_threshold(&c, 1.0).unwrap();
        let universal = sqtwolog_threshold(1.0, 64);
        assert!(sure < universal);
        assert_eq!(heursure_threshold(&c, 1.0).unwrap(), sure);
    }

    #[test]
    fn hard_and_soft_examples() {
        assert_eq!(hard_threshold(&[3.0, -1.0, 0.5, -4.0], 2.0), vec![3.0, 0.0, 0.0, -4.0]);
        assert_eq!(hard_threshold(&[1.0, 0.0, -2.0], 0.0), vec![1.0, 0.0, -2.0]);
        assert_eq!(hard_threshold(&[1.0, -2.0], 5.0), vec![0.0, 0.0]);
        // boundary coefficient is zeroed
        assert_eq!(hard_threshold(&[2.0], 2.0), vec![0.0]);
        assert_eq!(soft_threshold(&[3.0, -3.0], 2.0), vec![1.0, -1.0]);
        assert_eq!(soft_threshold(&[0.3, -1.7, 0.0], 0.0), vec![0.3, -1.7, 0.0]);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("HeurSure".parse::<RuleKind>().unwrap(), RuleKind::Heursure);
        assert!("garrote".parse::<Shrinkage>().is_err());
        assert!("visushrink".parse::<RuleKind>().is_err());
    }

    fn lcg_noise(n: usize, mut state: u64) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let mut acc = 0.0;
                for _ in 0..12 {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    acc += (state >> 11) as f64 / (1u64 << 53) as f64;
                }
                acc - 6.0
            })
            .collect()
    }

    #[test]
    fn classic_zero_in_zero_out() {
        let f = make_daubechies_filter::<f64>(8).unwrap();
        let s = Signal::new(vec![0.0; 1024], 80e6).unwrap();
        for kind in RuleKind::ALL {
            let (y, _) = denoise_classic(&s, ThresholdRule::soft(kind), &f, 6).unwrap();
            assert!(y.samples().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn classic_with_zero_thresholds_is_identity() {
        // Minimax on bands of <= 32 coefficients gives lambda = 0 everywhere,
        // so the pipeline collapses to idwt(dwt(x)).
        let f = make_daubechies_filter::<f64>(2).unwrap();
        let x = lcg_noise(64, 7);
        let s = Signal::new(x.clone(), 1.0).unwrap();
        let (y, applied) =
            denoise_classic(&s, ThresholdRule::new(RuleKind::Minimaxi, Shrinkage::Soft), &f, 1).unwrap();
        assert!(applied.iter().all(|l| l.lambda == 0.0));
        for (a, b) in x.iter().zip(y.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn classic_improves_noisy_sinusoid() {
        let n = 4096;
        let clean: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 4.0 * i as f64 / n as f64).sin())
            .collect();
        let noise = lcg_noise(n, 42);
        let noisy: Vec<f64> = clean.iter().zip(&noise).map(|(c, e)| c + 0.3 * e).collect();
        let f = make_daubechies_filter::<f64>(8).unwrap();
        let s = Signal::new(noisy.clone(), 80e6).unwrap();
        let (y, _) = denoise_classic(&s, ThresholdRule::soft(RuleKind::Sqtwolog), &f, 6).unwrap();
        let mse = |a: &[f64]| a.iter().zip(&clean).map(|(x, c)| (x - c).powi(2)).sum::<f64>() / n as f64;
        let before = mse(&noisy);
        let after = mse(y.samples());
        assert_eq!(y.len(), n);
        assert!(after < before, "{after} >= {before}");
        // regression baseline for this fixture
        assert!(after < 0.1 * before, "before {before}, after {after}");
    }

    proptest! {
        #[test]
        fn sure_matches_exhaustive_risk(
            coeffs in prop::collection::vec(-50.0f64..50.0, 1..256),
            sigma in 0.01f64..10.0,
        ) {
            prop_assert_eq!(sure_threshold(&coeffs, sigma).unwrap(), sure_oracle(&coeffs, sigma));
        }

        #[test]
        fn thresholds_are_homogeneous(
            coeffs in prop::collection::vec(-50.0f64..50.0, 1..200),
            sigma in 0.01f64..10.0,
            k in 0.1f64..20.0,
        ) {
            let scaled: Vec<f64> = coeffs.iter().map(|c| c * k).collect();
            let n = coeffs.len();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
            prop_assert!(close(sqtwolog_threshold(k * sigma, n), k * sqtwolog_threshold(sigma, n)));
            prop_assert!(close(minimax_threshold(k * sigma, n), k * minimax_threshold(sigma, n)));
            prop_assert!(close(sure_threshold(&scaled, k * sigma).unwrap(), k * sure_threshold(&coeffs, sigma).unwrap()));
            prop_assert!(close(heursure_threshold(&scaled, k * sigma).unwrap(), k * heursure_threshold(&coeffs, sigma).unwrap()));
            prop_assert!(close(mad_sigma(&scaled).unwrap(), k * mad_sigma(&coeffs).unwrap()));
        }

        #[test]
        fn heursure_bounded_by_universal(
            coeffs in prop::collection::vec(-50.0f64..50.0, 1..200),
            sigma in 0.01f64..10.0,
        ) {
            prop_assert!(heursure_threshold(&coeffs, sigma).unwrap() <= sqtwolog_threshold(sigma, coeffs.len()));
        }

        #[test]
        fn shrinkage_composition_and_contraction(
            coeffs in prop::collection::vec(-50.0f64..50.0, 0..100),
            t in 0.0f64..30.0,
        ) {
            let hard = hard_threshold(&coeffs, t);
            prop_assert_eq!(&hard_threshold(&hard, t), &hard);

            // soft shrinkage composes additively rather than idempotently
            let soft = soft_threshold(&coeffs, t);
            let twice = soft_threshold(&soft, t);
            for (a, b) in twice.iter().zip(soft_threshold(&coeffs, 2.0 * t)) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            prop_assert_eq!(&soft_threshold(&soft, 0.0), &soft);

            for mode in [Shrinkage::Hard, Shrinkage::Soft] {
                for (o, c) in shrink(&coeffs, t, mode).iter().zip(&coeffs) {
                    prop_assert!(o.abs() <= c.abs());
                }
            }
        }

        #[test]
        fn classic_preserves_length_and_finiteness(
            x in prop::collection::vec(-10.0f64..10.0, 128..600),
            kind_idx in 0usize..4,
        ) {
            let f = make_daubechies_filter::<f64>(4).unwrap();
            let s = Signal::new(x.clone(), 1.0).unwrap();
            let (y, _) = denoise_classic(&s, ThresholdRule::soft(RuleKind::ALL[kind_idx]), &f, 3).unwrap();
            prop_assert_eq!(y.len(), x.len());
            prop_assert!(y.samples().iter().all(|v| v.is_finite()));
        }
    }
}
