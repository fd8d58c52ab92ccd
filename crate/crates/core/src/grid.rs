//! Raster of A-lines and the maximum amplitude projection.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::ImageBuffer;
use crate::scalar::Real;
use crate::signal::Signal;
use crate::synth::add_noise_samples;

/// `ny x nx` A-lines of `nt` samples each, stored `[y][x][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid<T: Real> {
    ny: usize,
    nx: usize,
    nt: usize,
    sample_rate_hz: f64,
    data: Vec<T>,
    /// Optional (dy, dx) pixel pitch in metres, for display only.
    pub spacing_m: Option<(f64, f64)>,
}

impl<T: Real> ScanGrid<T> {
    pub fn new(ny: usize, nx: usize, nt: usize, sample_rate_hz: f64, data: Vec<T>) -> Result<Self> {
        if ny == 0 || nx == 0 || nt == 0 {
            return Err(Error::DimensionMismatch(format!("empty grid {ny}x{nx}x{nt}")));
        }
        if data.len() != ny * nx * nt {
            return Err(Error::DimensionMismatch(format!(
                "{ny}x{nx}x{nt} grid needs {} samples, got {}",
                ny * nx * nt,
                data.len()
            )));
        }
        // Reuse the per-signal validation for rate and finiteness.
        Signal::new(vec![T::zero()], sample_rate_hz)?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample in A-line {} at t = {}",
                i / nt,
                i % nt
            )));
        }
        Ok(Self {
            ny,
            nx,
            nt,
            sample_rate_hz,
            data,
            spacing_m: None,
        })
    }

    /// Row-major list of `ny * nx` signals sharing length and sample rate.
    pub fn from_signals(ny: usize, nx: usize, lines: &[Signal<T>]) -> Result<Self> {
        if lines.len() != ny * nx {
            return Err(Error::DimensionMismatch(format!(
                "{ny}x{nx} grid needs {} A-lines, got {}",
                ny * nx,
                lines.len()
            )));
        }
        let first = lines
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no A-lines".into()))?;
        let (nt, fs) = (first.len(), first.sample_rate_hz());
        let mut data = Vec::with_capacity(ny * nx * nt);
        for (i, l) in lines.iter().enumerate() {
            if l.len() != nt || l.sample_rate_hz() != fs {
                return Err(Error::DimensionMismatch(format!(
                    "A-line {i} has {} samples at {} Hz, expected {nt} at {fs} Hz",
                    l.len(),
                    l.sample_rate_hz()
                )));
            }
            data.extend_from_slice(l.samples());
        }
        Self::new(ny, nx, nt, fs, data)
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn lines(&self) -> usize {
        self.ny * self.nx
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn a_line(&self, y: usize, x: usize) -> &[T] {
        self.line(y * self.nx + x)
    }

    /// A-line by row-major index.
    pub fn line(&self, index: usize) -> &[T] {
        &self.data[index * self.nt..(index + 1) * self.nt]
    }

    pub fn signal(&self, index: usize) -> Signal<T> {
        Signal::new(self.line(index).to_vec(), self.sample_rate_hz)
            .expect("grid samples are validated")
    }

    /// Applies `f` to every A-line, possibly in parallel; results are
    /// gathered in row-major order and the first failure by index wins.
    pub fn try_map_lines<U, F>(&self, f: F) -> Result<Vec<U>>
    where
        U: Send,
        F: Fn(&Signal<T>) -> Result<U> + Sync,
    {
        (0..self.lines())
            .into_par_iter()
            .map(|i| {
                f(&self.signal(i)).map_err(|e| Error::ALine {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// Same shape, new samples.
    pub fn with_data(&self, data: Vec<T>) -> Result<Self> {
        let mut g = Self::new(self.ny, self.nx, self.nt, self.sample_rate_hz, data)?;
        g.spacing_m = self.spacing_m;
        Ok(g)
    }

    /// Noise calibrated against the power of the whole raster.
    pub fn with_noise(&self, target_snr_db: f64, seed: u64) -> Result<Self> {
        self.with_data(add_noise_samples(&self.data, target_snr_db, seed)?)
    }
}

/// What the loaders and the batch pipeline move around.
#[derive(Debug, Clone, PartialEq)]
pub enum Data<T: Real> {
    Signal(Signal<T>),
    Grid(ScanGrid<T>),
}

impl<T: Real> Data<T> {
    pub fn samples(&self) -> &[T] {
        match self {
            Data::Signal(s) => s.samples(),
            Data::Grid(g) => g.data(),
        }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        match self {
            Data::Signal(s) => s.sample_rate_hz(),
            Data::Grid(g) => g.sample_rate_hz(),
        }
    }

    /// `[nt]` for a signal, `[ny, nx, nt]` for a grid.
    pub fn shape(&self) -> Vec<usize> {
        match self {
            Data::Signal(s) => vec![s.len()],
            Data::Grid(g) => vec![g.ny(), g.nx(), g.nt()],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Data::Signal(_) => "signal",
            Data::Grid(_) => "grid",
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        Ok(match self {
            Data::Signal(s) => Data::Signal(s.with_samples(samples)?),
            Data::Grid(g) => Data::Grid(g.with_data(samples)?),
        })
    }

    /// Grids are calibrated against the power of the whole raster.
    pub fn with_noise(&self, target_snr_db: f64, seed: u64) -> Result<Self> {
        self.with_samples(add_noise_samples(self.samples(), target_snr_db, seed)?)
    }

    pub fn as_grid(&self) -> Option<&ScanGrid<T>> {
        match self {
            Data::Grid(g) => Some(g),
            Data::Signal(_) => None,
        }
    }

    /// The signal itself, or the A-line nearest the raster centre.
    pub fn representative_line(&self) -> Signal<T> {
        match self {
            Data::Signal(s) => s.clone(),
            Data::Grid(g) => g.signal((g.ny() / 2) * g.nx() + g.nx() / 2),
        }
    }
}

/// Pixel `(y, x)` is `max_t |a_line[y][x][t]|`.
pub fn map_project<T: Real>(grid: &ScanGrid<T>) -> ImageBuffer<T> {
    let pixels = grid
        .data
        .chunks_exact(grid.nt)
        .map(|line| line.iter().fold(T::zero(), |m, v| m.max(v.abs())))
        .collect();
    ImageBuffer::new(grid.ny, grid.nx, pixels).expect("grid dimensions are validated")
}
