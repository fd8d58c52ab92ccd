//! Periodic Mallat cascade.
//!
//! One analysis step maps a band `x` of even length `n` to
//!
//! ```text
//! a[k] = sum_i h[i] x[(2k + i) mod n]
//! d[k] = sum_i g[i] x[(2k + i) mod n]
//! ```
//!
//! which is an orthogonal map for any orthonormal `h` with QMF partner `g`,
//! so synthesis is the transpose.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::Signal;

use super::WaveletFilter;

/// Output of an `L`-level DWT: `A_L` plus `[D1, ..., DL]` (D1 finest).
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T: Real> {
    pub approx: Vec<T>,
    pub details: Vec<Vec<T>>,
    pub levels: usize,
    pub original_length: usize,
    pub sample_rate_hz: f64,
    pub filter_name: String,
}

impl<T: Real> Decomposition<T> {
    /// Detail band `D_level` (1-based, 1 = finest).
    pub fn detail(&self, level: usize) -> Option<&[T]> {
        level
            .checked_sub(1)
            .and_then(|i| self.details.get(i))
            .map(Vec::as_slice)
    }

    pub fn detail_mut(&mut self, level: usize) -> Option<&mut Vec<T>> {
        level.checked_sub(1).and_then(move |i| self.details.get_mut(i))
    }

    /// Length after zero padding to a multiple of `2^levels`.
    pub fn padded_length(&self) -> usize {
        self.approx.len() << self.levels
    }

    pub fn energy(&self) -> T {
        let sq = |b: &[T]| b.iter().map(|&c| c * c).sum::<T>();
        sq(&self.approx) + self.details.iter().map(|d| sq(d)).sum::<T>()
    }
}

/// Deepest decomposition that keeps every band entering an analysis step at
/// least as long as the filter, and never pads past one extra dyadic block.
pub fn max_feasible_depth(length: usize, taps: usize) -> usize {
    let mut depth = 0;
    loop {
        let next = depth + 1;
        if next >= usize::BITS as usize || (1usize << next) > length {
            return depth;
        }
        let block = 1usize << next;
        // band entering level `next` has 2 * ceil(length / 2^next) samples
        if 2 * length.div_ceil(block) < taps {
            return depth;
        }
        depth = next;
    }
}

fn padded_length(length: usize, levels: usize) -> usize {
    let block = 1usize << levels;
    length.div_ceil(block) * block
}

pub fn dwt<T: Real>(
    signal: &Signal<T>,
    filter: &WaveletFilter<T>,
    levels: usize,
) -> Result<Decomposition<T>> {
    let n = signal.len();
    let taps = filter.taps();
    if levels == 0 {
        return Err(Error::InvalidParameter("decomposition depth must be at least 1".into()));
    }
    let max_depth = max_feasible_depth(n, taps);
    if levels > max_depth {
        return Err(Error::DepthTooDeep {
            requested: levels,
            length: n,
            taps,
            max_depth,
        });
    }

    let mut band = signal.samples().to_vec();
    band.resize(padded_length(n, levels), T::zero());

    let mut details = Vec::with_capacity(levels);
    let mut ext = Vec::new();
    for _ in 0..levels {
        let (a, d) = analysis_step(&band, filter, &mut ext);
        details.push(d);
        band = a;
    }

    Ok(Decomposition {
        approx: band,
        details,
        levels,
        original_length: n,
        sample_rate_hz: signal.sample_rate_hz(),
        filter_name: filter.name().to_string(),
    })
}

pub fn idwt<T: Real>(decomp: &Decomposition<T>, filter: &WaveletFilter<T>) -> Result<Signal<T>> {
    if decomp.filter_name != filter.name() {
        return Err(Error::Structure(format!(
            "decomposition was produced with {} but {} was supplied",
            decomp.filter_name,
            filter.name()
        )));
    }
    if decomp.levels == 0 || decomp.details.len() != decomp.levels {
        return Err(Error::Structure(format!(
            "{} detail bands for {} levels",
            decomp.details.len(),
            decomp.levels
        )));
    }
    let base = decomp.approx.len();
    if base == 0 {
        return Err(Error::Structure("empty approximation band".into()));
    }
    for (j, d) in decomp.details.iter().enumerate() {
        let expected = base << (decomp.levels - 1 - j);
        if d.len() != expected {
            return Err(Error::Structure(format!(
                "D{} has {} coefficients, expected {expected}",
                j + 1,
                d.len()
            )));
        }
    }
    let padded = base << decomp.levels;
    if decomp.original_length == 0 || decomp.original_length > padded {
        return Err(Error::Structure(format!(
            "original length {} inconsistent with padded length {padded}",
            decomp.original_length
        )));
    }

    let mut band = decomp.approx.clone();
    let mut acc = Vec::new();
    for d in decomp.details.iter().rev() {
        band = synthesis_step(&band, d, filter, &mut acc);
    }
    band.truncate(decomp.original_length);
    Signal::new(band, decomp.sample_rate_hz)
}

fn analysis_step<T: Real>(x: &[T], filter: &WaveletFilter<T>, ext: &mut Vec<T>) -> (Vec<T>, Vec<T>) {
    let n = x.len();
    let h = filter.lowpass();
    let g = filter.highpass();
    let taps = h.len();

    ext.clear();
    ext.extend_from_slice(x);
    ext.extend((0..taps.saturating_sub(1)).map(|i| x[i % n]));

    let half = n / 2;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for k in 0..half {
        let window = &ext[2 * k..2 * k + taps];
        let mut a = T::zero();
        let mut d = T::zero();
        for ((&xi, &hi), &gi) in window.iter().zip(h).zip(g) {
            a += hi * xi;
            d += gi * xi;
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

fn synthesis_step<T: Real>(
    approx: &[T],
    detail: &[T],
    filter: &WaveletFilter<T>,
    acc: &mut Vec<T>,
) -> Vec<T> {
    let half = approx.len();
    let n = 2 * half;
    let h = filter.lowpass();
    let g = filter.highpass();
    let taps = h.len();

    acc.clear();
    acc.resize(n + taps, T::zero());
    for k in 0..half {
        let (a, d) = (approx[k], detail[k]);
        let out = &mut acc[2 * k..2 * k + taps];
        for ((o, &hi), &gi) in out.iter_mut().zip(h).zip(g) {
            *o += hi * a + gi * d;
        }
    }
    let mut x = acc[..n].to_vec();
    for (i, &v) in acc[n..].iter().enumerate() {
        x[i % n] += v;
    }
    x
}
