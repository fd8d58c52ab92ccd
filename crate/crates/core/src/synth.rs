//! Synthetic photoacoustic fixtures.
//!
//! Pulses are first derivatives of a Gaussian, the bipolar "N-shape" of a
//! small absorber. For a Gaussian of width `s` the derivative's spectrum
//! peaks at `1 / (2 pi s)`, which sets `s` from the requested center
//! frequency. Support is truncated at four widths either side of the center
//! and the center lands on a sample, so the rendered pulse is exactly
//! antisymmetric.
//!
//! Noise generation is fixed so that any implementation can reproduce it:
//! ChaCha20 seeded through `rand_core::SeedableRng::seed_from_u64`, uniform
//! doubles from the top 53 bits of each `next_u64`, standard normals by the
//! Box–Muller transform taken in (cos, sin) pairs. The normal draws are then
//! scaled so that the realized noise power hits the target SNR exactly.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::ScanGrid;
use crate::scalar::Real;
use crate::signal::Signal;

/// Half-support of a rendered pulse, in Gaussian widths.
pub const PULSE_HALF_WIDTHS: f64 = 4.0;

fn gaussian_width_s(center_freq_hz: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * center_freq_hz)
}

/// Samples from pulse start to pulse end (inclusive of both).
pub fn pulse_support_samples(center_freq_hz: f64, fs_hz: f64) -> usize {
    let half = (PULSE_HALF_WIDTHS * gaussian_width_s(center_freq_hz) * fs_hz).ceil() as usize;
    2 * half.max(1) + 1
}

/// Unit-peak pulse shape, length `pulse_support_samples`.
fn pulse_shape(center_freq_hz: f64, fs_hz: f64) -> Vec<f64> {
    let width = gaussian_width_s(center_freq_hz);
    let len = pulse_support_samples(center_freq_hz, fs_hz);
    let half = (len / 2) as isize;
    let mut shape: Vec<f64> = (0..len as isize)
        .map(|j| {
            let t = (j - half) as f64 / fs_hz / width;
            -t * (-0.5 * t * t).exp()
        })
        .collect();
    // enforce exact antisymmetry against rounding in exp
    for j in 0..len / 2 {
        let v = 0.5 * (shape[j] - shape[len - 1 - j]);
        shape[j] = v;
        shape[len - 1 - j] = -v;
    }
    shape[len / 2] = 0.0;
    let peak = shape.iter().fold(0.0_f64, |m, &v| m.max(v));
    shape.iter().map(|v| v / peak).collect()
}

fn check_pulse(center_freq_hz: f64, fs_hz: f64) -> Result<()> {
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(Error::InvalidParameter(format!("sample rate must be positive, got {fs_hz}")));
    }
    if !(center_freq_hz > 0.0 && center_freq_hz < fs_hz / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "center frequency {center_freq_hz} Hz violates Nyquist for fs = {fs_hz} Hz"
        )));
    }
    Ok(())
}

fn render_into(buf: &mut [f64], center_freq_hz: f64, fs_hz: f64, onset_s: f64, amplitude: f64) -> Result<()> {
    check_pulse(center_freq_hz, fs_hz)?;
    if !(onset_s >= 0.0 && onset_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("onset must be nonnegative, got {onset_s}")));
    }
    let start = (onset_s * fs_hz).round() as usize;
    let shape = pulse_shape(center_freq_hz, fs_hz);
    if start + shape.len() > buf.len() {
        return Err(Error::InvalidParameter(format!(
            "pulse at {onset_s} s with {} samples of support overruns a {}-sample record",
            shape.len(),
            buf.len()
        )));
    }
    for (b, s) in buf[start..start + shape.len()].iter_mut().zip(shape) {
        *b += amplitude * s;
    }
    Ok(())
}

fn record_len(fs_hz: f64, duration_s: f64) -> Result<usize> {
    let n = (duration_s * fs_hz).round();
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "duration {duration_s} s at {fs_hz} Hz holds no samples"
        )));
    }
    Ok(n as usize)
}

/// A single bipolar pulse whose start is at `onset_s`.
pub fn make_pa_pulse<T: Real>(
    center_freq_hz: f64,
    fs_hz: f64,
    duration_s: f64,
    onset_s: f64,
    amplitude: f64,
) -> Result<Signal<T>> {
    check_pulse(center_freq_hz, fs_hz)?;
    let mut buf = vec![0.0; record_len(fs_hz, duration_s)?];
    render_into(&mut buf, center_freq_hz, fs_hz, onset_s, amplitude)?;
    Signal::new(buf.into_iter().map(T::lit).collect(), fs_hz)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneComponent {
    pub label: String,
    pub onset_s: f64,
    pub center_freq_hz: f64,
    pub amplitude: f64,
}

impl SceneComponent {
    /// Sample range covered by this component's pulse.
    pub fn window(&self, fs_hz: f64) -> std::ops::Range<usize> {
        let start = (self.onset_s * fs_hz).round() as usize;
        start..start + pulse_support_samples(self.center_freq_hz, fs_hz)
    }
}

#[derive(Debug, Clone)]
pub struct PhantomScene<T: Real> {
    pub clean: Signal<T>,
    pub components: Vec<SceneComponent>,
    pub description: String,
}

impl<T: Real> PhantomScene<T> {
    pub fn component(&self, label: &str) -> Option<&SceneComponent> {
        self.components.iter().find(|c| c.label == label)
    }
}

/// Renders a list of components into one record.
pub fn render_scene<T: Real>(
    fs_hz: f64,
    duration_s: f64,
    components: Vec<SceneComponent>,
    description: impl Into<String>,
) -> Result<PhantomScene<T>> {
    let mut buf = vec![0.0; record_len(fs_hz, duration_s)?];
    let components: Vec<_> = components.into_iter().filter(|c| c.amplitude != 0.0).collect();
    for c in &components {
        render_into(&mut buf, c.center_freq_hz, fs_hz, c.onset_s, c.amplitude)?;
    }
    Ok(PhantomScene {
        clean: Signal::new(buf.into_iter().map(T::lit).collect(), fs_hz)?,
        components,
        description: description.into(),
    })
}

/// Soft-tissue speed of sound.
pub const SOUND_SPEED_M_S: f64 = 1540.0;
pub const LAYER_DEPTH_M: f64 = 0.013;

pub const COUPLED: &str = "coupled";
pub const SURFACE: &str = "surface";
pub const DEEP: &str = "deep";

/// Two absorbing layers plus an optional transducer-surface transient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoLayerParams {
    pub fs_hz: f64,
    pub duration_s: f64,
    pub surface_freq_hz: f64,
    pub deep_freq_hz: f64,
    pub surface_onset_s: f64,
    pub separation_s: f64,
    pub surface_amp: f64,
    pub deep_amp: f64,
    pub coupled_amp: f64,
    pub coupled_freq_hz: f64,
}

impl Default for TwoLayerParams {
    /// 4096 samples at 80 MHz; 15 MHz surface, 3 MHz layer 1.3 cm deeper
    /// (one-way travel at 1540 m/s, about 8.44 us), and a 20 MHz coupled burst at t = 0 with
    /// three times the surface amplitude.
    fn default() -> Self {
        Self {
            fs_hz: 80e6,
            duration_s: 4096.0 / 80e6,
            surface_freq_hz: 15e6,
            deep_freq_hz: 3e6,
            surface_onset_s: 10e-6,
            separation_s: LAYER_DEPTH_M / SOUND_SPEED_M_S,
            surface_amp: 1.0,
            deep_amp: 0.6,
            coupled_amp: 3.0,
            coupled_freq_hz: 20e6,
        }
    }
}

pub fn make_two_layer_scene<T: Real>(p: &TwoLayerParams) -> Result<PhantomScene<T>> {
    if !(p.separation_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "layer separation must be positive, got {}",
            p.separation_s
        )));
    }
    for f in [p.surface_freq_hz, p.deep_freq_hz, p.coupled_freq_hz] {
        check_pulse(f, p.fs_hz)?;
    }
    let comp = |label: &str, onset_s, center_freq_hz, amplitude| SceneComponent {
        label: label.into(),
        onset_s,
        center_freq_hz,
        amplitude,
    };
    render_scene(
        p.fs_hz,
        p.duration_s,
        vec![
            comp(COUPLED, 0.0, p.coupled_freq_hz, p.coupled_amp),
            comp(SURFACE, p.surface_onset_s, p.surface_freq_hz, p.surface_amp),
            comp(DEEP, p.surface_onset_s + p.separation_s, p.deep_freq_hz, p.deep_amp),
        ],
        format!(
            "two-layer scene: {} MHz surface, {} MHz deep layer {} us below, {} MHz coupled burst",
            p.surface_freq_hz / 1e6,
            p.deep_freq_hz / 1e6,
            p.separation_s * 1e6,
            p.coupled_freq_hz / 1e6
        ),
    )
}

/// Raster version of the two-layer scene used by the grid benchmark.
///
/// Both layers sit inside the band gaWD keeps (below D3 at 80 MHz): a skin
/// surface whose amplitude carries a mild texture and whose depth tilts
/// across the raster, and a low-frequency vessel layer 1.3 cm below it with
/// a faint continuous background and two brighter vessels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPhantomParams {
    pub ny: usize,
    pub nx: usize,
    pub nt: usize,
    pub fs_hz: f64,
    pub surface_freq_hz: f64,
    pub deep_freq_hz: f64,
    pub surface_onset_s: f64,
    /// Extra surface delay across the diagonal of the raster.
    pub surface_tilt_s: f64,
    pub separation_s: f64,
    pub surface_amp: f64,
    /// Peak deep amplitude, reached on a vessel centreline.
    pub deep_amp: f64,
    /// Fraction of `deep_amp` present away from the vessels.
    pub deep_background: f64,
}

impl Default for GridPhantomParams {
    fn default() -> Self {
        Self {
            ny: 16,
            nx: 16,
            nt: 4096,
            fs_hz: 80e6,
            surface_freq_hz: 2e6,
            deep_freq_hz: 0.2e6,
            surface_onset_s: 6e-6,
            surface_tilt_s: 0.5e-6,
            separation_s: LAYER_DEPTH_M / SOUND_SPEED_M_S,
            surface_amp: 1.0,
            deep_amp: 1.2,
            deep_background: 0.25,
        }
    }
}

impl GridPhantomParams {
    /// Vessel weight in [0, 1] at raster position `(y, x)`.
    pub fn vessel_weight(&self, y: usize, x: usize) -> f64 {
        let (yf, xf) = (y as f64, x as f64);
        let (ny, nx) = (self.ny as f64, self.nx as f64);
        let tau = std::f64::consts::TAU;
        // A meander running along x and a straight branch crossing it.
        let meander = ny * (0.47 + 0.19 * (tau * xf / nx).sin());
        let branch = nx * 0.69 + 0.3 * yf;
        let d1 = (yf - meander).abs() / (0.075 * ny);
        let d2 = (xf - branch).abs() / (0.0625 * nx);
        (-d1 * d1).exp().max((-d2 * d2).exp())
    }

    fn surface_amplitude(&self, y: usize, x: usize) -> f64 {
        let tau = std::f64::consts::TAU;
        let (yf, xf) = (y as f64, x as f64);
        self.surface_amp * (0.85 + 0.15 * (tau * xf / 8.0).cos() * (tau * yf / 11.0).sin())
    }
}

pub fn make_two_layer_grid<T: Real>(p: &GridPhantomParams) -> Result<ScanGrid<T>> {
    if p.ny == 0 || p.nx == 0 {
        return Err(Error::InvalidParameter(format!("empty raster {}x{}", p.ny, p.nx)));
    }
    if !(0.0..=1.0).contains(&p.deep_background) {
        return Err(Error::InvalidParameter(format!(
            "deep background fraction {} outside [0, 1]",
            p.deep_background
        )));
    }
    let duration_s = p.nt as f64 / p.fs_hz;
    let diag = (p.ny + p.nx).saturating_sub(2).max(1) as f64;
    let mut data = Vec::with_capacity(p.ny * p.nx * p.nt);
    for y in 0..p.ny {
        for x in 0..p.nx {
            let onset = p.surface_onset_s + p.surface_tilt_s * (y + x) as f64 / diag;
            let v = p.vessel_weight(y, x);
            let comp = |label: &str, onset_s, center_freq_hz, amplitude| SceneComponent {
                label: label.into(),
                onset_s,
                center_freq_hz,
                amplitude,
            };
            let scene = render_scene::<T>(
                p.fs_hz,
                duration_s,
                vec![
                    comp(SURFACE, onset, p.surface_freq_hz, p.surface_amplitude(y, x)),
                    comp(
                        DEEP,
                        onset + p.separation_s,
                        p.deep_freq_hz,
                        p.deep_amp * (p.deep_background + (1.0 - p.deep_background) * v),
                    ),
                ],
                String::new(),
            )?;
            data.extend_from_slice(scene.clean.samples());
        }
    }
    ScanGrid::new(p.ny, p.nx, p.nt, p.fs_hz, data)
}

/// `n` standard normal draws from the documented generator.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut uniform = move || {
        // (0, 1]: avoids ln(0)
        ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
    };
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = uniform();
        let u2 = uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
    }
    out.truncate(n);
    out
}

/// Adds white Gaussian noise so that `10 log10(P_signal / P_noise)` equals
/// `target_snr_db` for the realized noise. `+inf` returns the input as is.
pub fn add_noise<T: Real>(signal: &Signal<T>, target_snr_db: f64, seed: u64) -> Result<Signal<T>> {
    let noisy = add_noise_samples(signal.samples(), target_snr_db, seed)?;
    signal.with_samples(noisy)
}

pub(crate) fn add_noise_samples<T: Real>(samples: &[T], target_snr_db: f64, seed: u64) -> Result<Vec<T>> {
    if target_snr_db == f64::INFINITY {
        return Ok(samples.to_vec());
    }
    if !target_snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("target SNR {target_snr_db} dB")));
    }
    let energy: f64 = samples.iter().map(|s| s.as_f64().powi(2)).sum();
    if energy == 0.0 {
        return Err(Error::Degenerate(
            "cannot calibrate noise against a zero-power signal".into(),
        ));
    }
    let noise = standard_normals(samples.len(), seed);
    let noise_energy: f64 = noise.iter().map(|v| v * v).sum();
    let gain = (energy / 10f64.powf(target_snr_db / 10.0) / noise_energy).sqrt();
    Ok(samples
        .iter()
        .zip(noise)
        .map(|(&s, e)| s + T::lit(gain * e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{snr_db, SnrSpec};

    const FS: f64 = 80e6;

    #[test]
    fn pulse_zero_mean_and_peak() {
        for f0 in [1e6, 3e6, 10e6, 15e6, 30e6] {
            for a in [0.5, 1.0, 7.0] {
                let p = make_pa_pulse::<f64>(f0, FS, 20e-6, 2e-6, a).unwrap();
                let sum: f64 = p.samples().iter().sum();
                assert!(sum.abs() <= 1e-9 * a, "{f0} {a}: {sum}");
                let max = p.samples().iter().cloned().fold(f64::MIN, f64::max);
                assert!((max - a).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pulse_spectral_peak() {
        let p = make_pa_pulse::<f64>(10e6, FS, 4096.0 / FS, 10e-6, 1.0).unwrap();
        let x = p.samples();
        // direct DFT magnitude on a 10 kHz grid up to Nyquist
        let mut best = (0.0, 0.0);
        let mut f = 0.0;
        while f <= FS / 2.0 {
            let w = 2.0 * std::f64::consts::PI * f / FS;
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &v) in x.iter().enumerate() {
                re += v * (w * n as f64).cos();
                im -= v * (w * n as f64).sin();
            }
            let m = re.hypot(im);
            if m > best.1 {
                best = (f, m);
            }
            f += 50e3;
        }
        assert!((8e6..=12e6).contains(&best.0), "peak at {} Hz", best.0);
    }

    #[test]
    fn pulse_errors() {
        assert!(make_pa_pulse::<f64>(40e6, FS, 1e-6, 0.0, 1.0).is_err());
        assert!(make_pa_pulse::<f64>(1e6, FS, 1e-6, 0.9e-6, 1.0).is_err());
    }

    #[test]
    fn lone_deep_pulse() {
        let p = TwoLayerParams {
            coupled_amp: 0.0,
            surface_amp: 0.0,
            ..TwoLayerParams::default()
        };
        let scene = make_two_layer_scene::<f64>(&p).unwrap();
        assert_eq!(scene.components.len(), 1);
        let lone = make_pa_pulse::<f64>(
            p.deep_freq_hz,
            p.fs_hz,
            p.duration_s,
            p.surface_onset_s + p.separation_s,
            p.deep_amp,
        )
        .unwrap();
        assert_eq!(scene.clean, lone);
        assert_eq!(make_two_layer_scene::<f64>(&TwoLayerParams::default()).unwrap().components.len(), 3);
    }

    #[test]
    fn scene_is_linear_in_amplitudes() {
        let base = TwoLayerParams::default();
        let doubled = TwoLayerParams {
            surface_amp: 2.0 * base.surface_amp,
            deep_amp: 2.0 * base.deep_amp,
            coupled_amp: 2.0 * base.coupled_amp,
            ..base.clone()
        };
        let a = make_two_layer_scene::<f64>(&base).unwrap();
        let b = make_two_layer_scene::<f64>(&doubled).unwrap();
        for (x, y) in a.clean.samples().iter().zip(b.clean.samples()) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn scene_rejects_bad_params() {
        let p = TwoLayerParams { separation_s: 0.0, ..TwoLayerParams::default() };
        assert!(make_two_layer_scene::<f64>(&p).is_err());
        let p = TwoLayerParams { deep_freq_hz: 45e6, ..TwoLayerParams::default() };
        assert!(make_two_layer_scene::<f64>(&p).is_err());
    }

    #[test]
    fn noise_hits_target_snr() {
        let scene = make_two_layer_scene::<f64>(&TwoLayerParams::default()).unwrap();
        for seed in 1..=5 {
            let noisy = add_noise(&scene.clean, 18.0, seed).unwrap();
            let snr = snr_db(&noisy, &SnrSpec::Reference(scene.clean.samples())).unwrap();
            assert!((snr - 18.0).abs() <= 0.2, "seed {seed}: {snr}");
            assert_eq!(noisy.len(), scene.clean.len());
            assert_eq!(noisy.sample_rate_hz(), scene.clean.sample_rate_hz());
        }
    }

    #[test]
    fn noise_determinism() {
        let s = make_pa_pulse::<f64>(5e6, FS, 4096.0 / FS, 5e-6, 1.0).unwrap();
        let a = add_noise(&s, 10.0, 7).unwrap();
        let b = add_noise(&s, 10.0, 7).unwrap();
        let c = add_noise(&s, 10.0, 8).unwrap();
        assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, c);
        assert_eq!(add_noise(&s, f64::INFINITY, 7).unwrap(), s);
    }

    #[test]
    fn noise_is_zero_mean() {
        let s = Signal::new(vec![1.0; 8192], FS).unwrap();
        let noisy = add_noise(&s, 0.0, 3).unwrap();
        let n = noisy.len() as f64;
        let mean = noisy.samples().iter().map(|v| v - 1.0).sum::<f64>() / n;
        // sigma = 1 at 0 dB against unit power
        assert!(mean.abs() <= 4.0 / n.sqrt());
    }

    #[test]
    fn zero_power_is_degenerate() {
        let s = Signal::new(vec![0.0; 16], FS).unwrap();
        assert!(matches!(add_noise(&s, 18.0, 1), Err(Error::Degenerate(_))));
        assert!(add_noise(&s, f64::INFINITY, 1).is_ok());
    }

    #[test]
    fn normals_have_unit_variance() {
        let v = standard_normals(100_000, 11);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.02);
        assert_eq!(standard_normals(3, 11), v[..3]);
    }

    #[test]
    fn grid_phantom_layout() {
        let p = GridPhantomParams::default();
        let g = make_two_layer_grid::<f64>(&p).unwrap();
        assert_eq!((g.ny(), g.nx(), g.nt()), (16, 16, 4096));
        for y in 0..16 {
            for x in 0..16 {
                let w = p.vessel_weight(y, x);
                assert!((0.0..=1.0).contains(&w));
                let peak = g.a_line(y, x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!(peak > 0.0);
            }
        }
        // the surface sits in the first third, the deep layer after it
        let line = g.a_line(0, 0);
        let argmax = |r: std::ops::Range<usize>| {
            r.clone().max_by(|&a, &b| line[a].abs().partial_cmp(&line[b].abs()).unwrap()).unwrap()
        };
        assert!(argmax(0..1000) < 700);
        assert!(argmax(1000..4096) > 1000);
        let bad = GridPhantomParams { deep_background: 1.5, ..p };
        assert!(make_two_layer_grid::<f64>(&bad).is_err());
    }
}
