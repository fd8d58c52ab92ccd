use crate::error::{Error, Result};
use crate::scalar::Real;

/// A sampled real-valued waveform.
///
/// Construction enforces a non-empty, finite sample buffer and a positive
/// sample rate, so every consumer can rely on those invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T: Real> {
    samples: Vec<T>,
    sample_rate_hz: f64,
}

impl<T: Real> Signal<T> {
    pub fn new(samples: Vec<T>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("no samples".into()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample {} at index {i}",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![T::zero(); len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Same sample rate, new samples. Validates the new buffer.
    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz)
    }

    pub fn energy(&self) -> T {
        self.samples.iter().map(|&s| s * s).sum()
    }

    pub fn power(&self) -> T {
        self.energy() / T::from_usize_lossy(self.len())
    }

    pub fn scaled(&self, k: T) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|&s| s * k).collect())
    }
}
