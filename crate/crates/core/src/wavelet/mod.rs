//! Orthogonal 1-D discrete wavelet transform with Daubechies filters and
//! periodic boundary handling.

mod filter;
mod transform;

pub use filter::{
    daubechies_taps, make_daubechies_filter, wavelet_by_name, WaveletFilter, MAX_ORDER, MIN_ORDER,
};
pub use transform::{dwt, idwt, max_feasible_depth, Decomposition};
