//! Gradient-based adaptive wavelet denoising (gaWD) for photoacoustic
//! A-lines, with the classic wavelet threshold rules and a Butterworth
//! low-pass as baselines.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for callers that do not care. Filter design runs in
//! `f64` and is cast to the working type.
//!
//! ```
//! use gawd_core::{gawd_denoise, GawdConfig, SignalF64};
//!
//! let x: Vec<f64> = (0..1024).map(|i| (i as f64 * 0.01).sin()).collect();
//! let s = SignalF64::new(x, 80e6).unwrap();
//! let (clean, trace) = gawd_denoise(&s, &GawdConfig::default()).unwrap();
//! assert_eq!(clean.len(), s.len());
//! assert!(trace.threshold >= 0.0);
//! ```

pub mod baselines;
pub mod error;
pub mod gawd;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod poly;
pub mod scalar;
pub mod signal;
pub mod synth;
pub mod thresholding;
pub mod wavelet;

pub use baselines::{butterworth_lowpass, filtfilt, iir_filter, IirCoefficients};
pub use error::{Error, ErrorKind, Result};
pub use gawd::{gawd_denoise, gawd_threshold, GawdConfig, GawdDenoiser, GawdThresholdTrace};
pub use grid::{map_project, Data, ScanGrid};
pub use io::Format;
pub use metrics::{mse, psnr, snr_db, ssim, ImageBuffer, SnrSpec, SATURATED_DB};
pub use pipeline::{compare, run_denoise, CompareSpec, Method, MethodParams, RunReport};
pub use scalar::Real;
pub use signal::Signal;
pub use synth::{add_noise, make_pa_pulse, make_two_layer_grid, make_two_layer_scene};
pub use thresholding::{denoise_classic, RuleKind, Shrinkage, ThresholdRule};
pub use wavelet::{dwt, idwt, make_daubechies_filter, Decomposition, WaveletFilter};

pub type SignalF64 = Signal<f64>;
pub type SignalF32 = Signal<f32>;
pub type ScanGridF64 = ScanGrid<f64>;
pub type ScanGridF32 = ScanGrid<f32>;
pub type ImageF64 = ImageBuffer<f64>;
pub type ImageF32 = ImageBuffer<f32>;
pub type DecompositionF64 = Decomposition<f64>;
pub type DecompositionF32 = Decomposition<f32>;
pub type FilterF64 = WaveletFilter<f64>;
pub type FilterF32 = WaveletFilter<f32>;
pub type DataF64 = Data<f64>;
pub type DataF32 = Data<f32>;
