//! Gradient-based adaptive wavelet denoising (gaWD).
//!
//! The signal is decomposed to six levels with db8. The three finest detail
//! bands carry mostly noise and the transducer-surface coupled transient, so
//! they are cleared outright. A single hard threshold `T` is read off the
//! coarsest detail band: its magnitudes are sorted ascending, and `T` sits at
//! the second largest jump between neighbours in that sorted sequence. The
//! largest jump usually separates a handful of dominant coefficients from
//! everything else; the second one marks where noise ends and signal begins.
//! `T` is then applied to D4, D5 and D6 alike.
//!
//! Conventions:
//! * `T` is the magnitude just above the chosen jump, and coefficients with
//!   `|w| >= T` survive, so the lowest member of the signal cluster is kept.
//! * Equal jumps resolve toward the larger index (higher `T`).
//! * Fewer than four source coefficients, or a sorted sequence with no jump at
//!   all, yields `T = 0`: the threshold bands pass through unchanged while the
//!   noise bands are still cleared.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Signal;
use crate::wavelet::{dwt, idwt, wavelet_by_name, WaveletFilter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GawdConfig {
    pub wavelet: String,
    pub levels: usize,
    pub noise_levels: Vec<usize>,
    pub threshold_levels: Vec<usize>,
    pub source_level: usize,
}

impl Default for GawdConfig {
    fn default() -> Self {
        Self {
            wavelet: "db8".into(),
            levels: 6,
            noise_levels: vec![1, 2, 3],
            threshold_levels: vec![4, 5, 6],
            source_level: 6,
        }
    }
}

impl GawdConfig {
    /// Default band split rescaled to a different depth: the finest half of
    /// the levels is cleared, the rest thresholded from the coarsest.
    pub fn with_levels(wavelet: impl Into<String>, levels: usize) -> Self {
        let split = levels / 2;
        Self {
            wavelet: wavelet.into(),
            levels,
            noise_levels: (1..=split).collect(),
            threshold_levels: (split + 1..=levels).collect(),
            source_level: levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.levels == 0 {
            return bad("gaWD needs at least one decomposition level".into());
        }
        let noise: BTreeSet<_> = self.noise_levels.iter().copied().collect();
        let thresh: BTreeSet<_> = self.threshold_levels.iter().copied().collect();
        if let Some(l) = noise.iter().chain(&thresh).find(|&&l| l == 0 || l > self.levels) {
            return bad(format!("band index {l} outside 1..={}", self.levels));
        }
        if let Some(l) = noise.intersection(&thresh).next() {
            return bad(format!("level {l} is both cleared and thresholded"));
        }
        if !thresh.contains(&self.source_level) {
            return bad(format!(
                "source level {} is not among the thresholded levels",
                self.source_level
            ));
        }
        Ok(())
    }
}

/// Every intermediate of the threshold search, kept for auditing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GawdThresholdTrace<T: Real> {
    pub sorted_magnitudes: Vec<T>,
    pub gaps: Vec<T>,
    pub largest_gap_index: Option<usize>,
    pub second_largest_gap_index: Option<usize>,
    pub threshold: T,
    pub degenerate: bool,
}

/// Minimum number of source coefficients for the gap search.
pub const MIN_SOURCE_COEFFS: usize = 4;

pub fn gawd_threshold<T: Real>(coeffs: &[T]) -> Result<(T, GawdThresholdTrace<T>)> {
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite coefficient at index {i}"
        )));
    }
    let mut sorted: Vec<T> = coeffs.iter().map(|c| c.abs()).collect();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let gaps: Vec<T> = sorted.windows(2).map(|w| w[1] - w[0]).collect();

    let degenerate_trace = |sorted, gaps| GawdThresholdTrace {
        sorted_magnitudes: sorted,
        gaps,
        largest_gap_index: None,
        second_largest_gap_index: None,
        threshold: T::zero(),
        degenerate: true,
    };

    if sorted.len() < MIN_SOURCE_COEFFS || gaps.iter().all(|&g| g == T::zero()) {
        return Ok((T::zero(), degenerate_trace(sorted, gaps)));
    }

    // `>=` while scanning upward resolves ties toward the larger index.
    let argmax_excluding = |skip: Option<usize>| {
        let mut best: Option<usize> = None;
        for (k, &g) in gaps.iter().enumerate() {
            if Some(k) == skip {
                continue;
            }
            if best.map_or(true, |b| g >= gaps[b]) {
                best = Some(k);
            }
        }
        best
    };
    let largest = argmax_excluding(None).expect("at least three gaps");
    let second = argmax_excluding(Some(largest)).expect("at least three gaps");
    let threshold = sorted[second + 1];

    Ok((
        threshold,
        GawdThresholdTrace {
            sorted_magnitudes: sorted,
            gaps,
            largest_gap_index: Some(largest),
            second_largest_gap_index: Some(second),
            threshold,
            degenerate: false,
        },
    ))
}

/// Zeroes every coefficient with `|w| < t`.
pub fn keep_at_or_above<T: Real>(coeffs: &mut [T], t: T) {
    for c in coeffs.iter_mut() {
        if c.abs() < t {
            *c = T::zero();
        }
    }
}

/// A validated configuration bound to its filter, reusable across A-lines.
#[derive(Debug, Clone)]
pub struct GawdDenoiser<T: Real> {
    config: GawdConfig,
    filter: WaveletFilter<T>,
}

impl<T: Real> GawdDenoiser<T> {
    pub fn new(config: GawdConfig) -> Result<Self> {
        config.validate()?;
        let filter = wavelet_by_name(&config.wavelet)?;
        Ok(Self { config, filter })
    }

    pub fn config(&self) -> &GawdConfig {
        &self.config
    }

    pub fn filter(&self) -> &WaveletFilter<T> {
        &self.filter
    }

    pub fn denoise(&self, signal: &Signal<T>) -> Result<(Signal<T>, GawdThresholdTrace<T>)> {
        let cfg = &self.config;
        let mut decomp = dwt(signal, &self.filter, cfg.levels)?;

        for &level in &cfg.noise_levels {
            if let Some(band) = decomp.detail_mut(level) {
                band.iter_mut().for_each(|c| *c = T::zero());
            }
        }

        let source = decomp
            .detail(cfg.source_level)
            .expect("validated source level");
        let (threshold, trace) = gawd_threshold(source)?;

        for &level in &cfg.threshold_levels {
            if let Some(band) = decomp.detail_mut(level) {
                keep_at_or_above(band, threshold);
            }
        }

        Ok((idwt(&decomp, &self.filter)?, trace))
    }
}

pub fn gawd_denoise<T: Real>(
    signal: &Signal<T>,
    config: &GawdConfig,
) -> Result<(Signal<T>, GawdThresholdTrace<T>)> {
    GawdDenoiser::new(config.clone())?.denoise(signal)
}
