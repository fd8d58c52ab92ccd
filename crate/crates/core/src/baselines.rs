//! Butterworth low-pass baseline.
//!
//! Design goes through the analog prototype, frequency pre-warping and the
//! bilinear transform. Poles are paired into second-order sections, each
//! normalized to unity DC gain; the sections are kept for filtering and also
//! multiplied out into the flat `b`/`a` form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;
use crate::scalar::Real;
use crate::signal::Signal;

/// One `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2` section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<T: Real> {
    pub b: [T; 3],
    pub a: [T; 2],
}

impl<T: Real> Biquad<T> {
    /// Direct form II transposed over the whole buffer, in place.
    fn run(&self, x: &mut [T]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let (mut s1, mut s2) = (T::zero(), T::zero());
        for v in x.iter_mut() {
            let input = *v;
            let out = b0 * input + s1;
            s1 = b1 * input - a1 * out + s2;
            s2 = b2 * input - a2 * out;
            *v = out;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IirCoefficients<T: Real> {
    pub feedforward: Vec<T>,
    pub feedback: Vec<T>,
    pub order: usize,
    pub cutoff_hz: f64,
    pub sample_rate_hz: f64,
    sections: Vec<Biquad<T>>,
}

impl<T: Real> IirCoefficients<T> {
    /// Plain difference-equation coefficients; `feedback[0]` must be 1.
    pub fn from_ba(feedforward: Vec<T>, feedback: Vec<T>, sample_rate_hz: f64) -> Result<Self> {
        if feedforward.is_empty() || feedback.is_empty() {
            return Err(Error::Design("empty coefficient vector".into()));
        }
        if feedback[0] != T::one() {
            return Err(Error::Design(format!("a[0] must be 1, got {}", feedback[0])));
        }
        if feedforward.iter().chain(&feedback).any(|c| !c.is_finite()) {
            return Err(Error::Design("non-finite coefficient".into()));
        }
        let order = feedforward.len().max(feedback.len()) - 1;
        Ok(Self {
            feedforward,
            feedback,
            order,
            cutoff_hz: f64::NAN,
            sample_rate_hz,
            sections: Vec::new(),
        })
    }

    pub fn sections(&self) -> &[Biquad<T>] {
        &self.sections
    }

    /// `|H(e^{jw})|` at `freq_hz`. Designed filters are evaluated section by
    /// section; the flat form loses precision at low normalized cutoffs.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        if self.sections.is_empty() {
            return self.flat_magnitude_at(freq_hz);
        }
        let w = self.normalized(freq_hz);
        self.sections
            .iter()
            .map(|s| {
                let num = eval_poly(&s.b, w);
                let den = eval_poly(&[T::one(), s.a[0], s.a[1]], w);
                (num / den).norm()
            })
            .product()
    }

    /// `|H(e^{jw})|` from the flat `b`/`a` coefficients.
    pub fn flat_magnitude_at(&self, freq_hz: f64) -> f64 {
        let w = self.normalized(freq_hz);
        (eval_poly(&self.feedforward, w) / eval_poly(&self.feedback, w)).norm()
    }

    fn normalized(&self, freq_hz: f64) -> f64 {
        2.0 * std::f64::consts::PI * freq_hz / self.sample_rate_hz
    }

    /// Poles as roots of the flattened denominator.
    pub fn poles(&self) -> Vec<Complex64> {
        // z^M A(z^-1) has ascending coefficients a[M], ..., a[0].
        let rev: Vec<f64> = self.feedback.iter().rev().map(|v| v.as_f64()).collect();
        poly::roots(&rev)
    }
}

fn eval_poly<T: Real>(c: &[T], w: f64) -> Complex64 {
    c.iter()
        .enumerate()
        .map(|(m, &v)| Complex64::from_polar(v.as_f64(), -w * m as f64))
        .sum()
}

pub fn butterworth_lowpass<T: Real>(
    order: usize,
    cutoff_hz: f64,
    sample_rate_hz: f64,
) -> Result<IirCoefficients<T>> {
    if order == 0 {
        return Err(Error::Design("order must be at least 1".into()));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::Design(format!("invalid sample rate {sample_rate_hz} Hz")));
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::Design(format!(
            "cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)"
        )));
    }

    let fs2 = 2.0 * sample_rate_hz;
    let warped = fs2 * (std::f64::consts::PI * cutoff_hz / sample_rate_hz).tan();
    let bilinear = |s: Complex64| (fs2 + s) / (fs2 - s);

    let mut sections_f64: Vec<([f64; 3], [f64; 2])> = Vec::new();
    for k in 0..order / 2 {
        let theta = std::f64::consts::PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let z = bilinear(Complex64::from_polar(warped, theta));
        let a1 = -2.0 * z.re;
        let a2 = z.norm_sqr();
        let gain = (1.0 + a1 + a2) / 4.0;
        sections_f64.push(([gain, 2.0 * gain, gain], [a1, a2]));
    }
    if order % 2 == 1 {
        let z = bilinear(Complex64::new(-warped, 0.0)).re;
        let gain = (1.0 - z) / 2.0;
        sections_f64.push(([gain, gain, 0.0], [-z, 0.0]));
    }

    let mut b = vec![1.0];
    let mut a = vec![1.0];
    for (sb, sa) in &sections_f64 {
        b = poly::multiply(&b, sb);
        a = poly::multiply(&a, &[1.0, sa[0], sa[1]]);
    }
    b.truncate(order + 1);
    a.truncate(order + 1);

    Ok(IirCoefficients {
        feedforward: b.into_iter().map(T::lit).collect(),
        feedback: a.into_iter().map(T::lit).collect(),
        order,
        cutoff_hz,
        sample_rate_hz,
        sections: sections_f64
            .into_iter()
            .map(|(sb, sa)| Biquad {
                b: sb.map(T::lit),
                a: sa.map(T::lit),
            })
            .collect(),
    })
}

/// Causal filtering from rest. Designed filters run through their
/// second-order sections; hand-built `b`/`a` sets use the direct form
/// `y[n] = sum b[m] x[n-m] - sum_{m>=1} a[m] y[n-m]`.
pub fn iir_filter<T: Real>(signal: &Signal<T>, coeffs: &IirCoefficients<T>) -> Result<Signal<T>> {
    let mut y = signal.samples().to_vec();
    apply_in_place(&mut y, coeffs);
    signal.with_samples(y)
}

/// Forward then time-reversed pass: zero phase, squared magnitude.
pub fn filtfilt<T: Real>(signal: &Signal<T>, coeffs: &IirCoefficients<T>) -> Result<Signal<T>> {
    let mut y = signal.samples().to_vec();
    apply_in_place(&mut y, coeffs);
    y.reverse();
    apply_in_place(&mut y, coeffs);
    y.reverse();
    signal.with_samples(y)
}

fn apply_in_place<T: Real>(x: &mut [T], coeffs: &IirCoefficients<T>) {
    if !coeffs.sections.is_empty() {
        for s in &coeffs.sections {
            s.run(x);
        }
        return;
    }
    let b = &coeffs.feedforward;
    let a = &coeffs.feedback;
    let input = x.to_vec();
    for n in 0..x.len() {
        let mut acc = T::zero();
        for (m, &bm) in b.iter().enumerate().take(n + 1) {
            acc += bm * input[n - m];
        }
        for (m, &am) in a.iter().enumerate().skip(1).take(n) {
            acc -= am * x[n - m];
        }
        x[n] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FS: f64 = 80e6;

    #[test]
    fn order_four_has_five_taps() {
        let c = butterworth_lowpass::<f64>(4, 15e6, FS).unwrap();
        assert_eq!(c.feedforward.len(), 5);
        assert_eq!(c.feedback.len(), 5);
        assert_eq!(c.feedback[0], 1.0);
        assert_eq!(c.sections().len(), 2);
    }

    #[test]
    fn dc_gain_and_cutoff() {
        for order in 1..=8 {
            for fc in [1e6, 5e6, 15e6, 30e6] {
                let c = butterworth_lowpass::<f64>(order, fc, FS).unwrap();
                assert!((c.magnitude_at(0.0) - 1.0).abs() < 1e-9);
                let at_cut = c.magnitude_at(fc);
                assert!((at_cut - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6, "order {order} fc {fc}: {at_cut}");
            }
        }
    }

    #[test]
    fn flat_and_sectioned_responses_agree() {
        let c = butterworth_lowpass::<f64>(4, 15e6, FS).unwrap();
        for i in 0..64 {
            let f = FS / 2.0 * i as f64 / 64.0;
            assert!((c.magnitude_at(f) - c.flat_magnitude_at(f)).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_magnitude() {
        let c = butterworth_lowpass::<f64>(4, 15e6, FS).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..512 {
            let m = c.magnitude_at(FS / 2.0 * i as f64 / 511.0);
            assert!(m <= prev + 1e-12, "bin {i}: {m} > {prev}");
            prev = m;
        }
    }

    #[test]
    fn rejects_cutoff_at_or_above_nyquist() {
        assert!(matches!(butterworth_lowpass::<f64>(4, 40e6, FS), Err(Error::Design(_))));
        assert!(matches!(butterworth_lowpass::<f64>(4, 50e6, FS), Err(Error::Design(_))));
        assert!(butterworth_lowpass::<f64>(4, 0.0, FS).is_err());
        assert!(butterworth_lowpass::<f64>(0, 1e6, FS).is_err());
    }

    #[test]
    fn poles_inside_unit_circle() {
        for order in [2, 4, 6] {
            let c = butterworth_lowpass::<f64>(order, 2e6, FS).unwrap();
            let poles = c.poles();
            assert_eq!(poles.len(), order);
            assert!(poles.iter().all(|p| p.norm() < 1.0 - 1e-9));
        }
    }

    #[test]
    fn zero_and_identity() {
        let s = Signal::new(vec![0.0; 32], FS).unwrap();
        let c = butterworth_lowpass::<f64>(4, 10e6, FS).unwrap();
        assert!(iir_filter(&s, &c).unwrap().samples().iter().all(|&v| v == 0.0));

        let x = Signal::new(vec![1.0, -2.0, 3.5, 0.25], FS).unwrap();
        let id = IirCoefficients::from_ba(vec![1.0], vec![1.0], FS).unwrap();
        assert_eq!(iir_filter(&x, &id).unwrap(), x);
    }

    #[test]
    fn impulse_response_matches_scalar_recursion() {
        let c = butterworth_lowpass::<f64>(2, 12e6, FS).unwrap();
        let mut x = vec![0.0; 64];
        x[0] = 1.0;
        let y = iir_filter(&Signal::new(x.clone(), FS).unwrap(), &c).unwrap();

        let (b, a) = (&c.feedforward, &c.feedback);
        let mut oracle = vec![0.0; 64];
        for n in 0..64 {
            let mut v = 0.0;
            for m in 0..=2 {
                if n >= m {
                    v += b[m] * x[n - m];
                    if m > 0 {
                        v -= a[m] * oracle[n - m];
                    }
                }
            }
            oracle[n] = v;
        }
        for (p, q) in y.samples().iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-12);
        }

        // the flat direct form agrees with the cascade
        let flat = IirCoefficients::from_ba(b.clone(), a.clone(), FS).unwrap();
        let z = iir_filter(&Signal::new(x, FS).unwrap(), &flat).unwrap();
        for (p, q) in z.samples().iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn filtfilt_has_no_delay_on_symmetric_pulse() {
        let n = 512;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 - 256.0) / 20.0;
                (-t * t).exp()
            })
            .collect();
        let c = butterworth_lowpass::<f64>(4, 5e6, FS).unwrap();
        let y = filtfilt(&Signal::new(x, FS).unwrap(), &c).unwrap();
        let peak = y
            .samples()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 256);
    }

    proptest! {
        #[test]
        fn linear_and_time_invariant(
            x in prop::collection::vec(-5.0f64..5.0, 64),
            y in prop::collection::vec(-5.0f64..5.0, 64),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
            shift in 1usize..16,
        ) {
            let c = butterworth_lowpass::<f64>(4, 10e6, FS).unwrap();
            let f = |v: &[f64]| iir_filter(&Signal::new(v.to_vec(), FS).unwrap(), &c).unwrap().into_samples();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            let fx = f(&x);
            let fy = f(&y);
            for ((m, a), b) in f(&mix).iter().zip(&fx).zip(&fy) {
                prop_assert!((m - (alpha * a + beta * b)).abs() < 1e-9);
            }
            // delaying the input by `shift` samples delays the output
            let mut delayed = vec![0.0; shift];
            delayed.extend_from_slice(&x[..64 - shift]);
            let fd = f(&delayed);
            for n in shift..64 {
                prop_assert!((fd[n] - fx[n - shift]).abs() < 1e-9);
            }
        }
    }
}
