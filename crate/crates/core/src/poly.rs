//! Polynomial helpers: complex root finding and coefficient expansion.

use num_complex::Complex64;

/// All complex roots of `coeffs[0] + coeffs[1] x + ... + coeffs[n] x^n`.
///
/// Aberth–Ehrlich simultaneous iteration followed by a few Newton polishing
/// steps on each root against the original polynomial.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let degree = c.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let lead = c[degree];
    let monic: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v / lead, 0.0)).collect();

    // Initial guesses on a circle bounded by the Cauchy radius, rotated off the
    // real axis so conjugate pairs separate.
    let radius = 1.0
        + monic[..degree]
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max);
    let radius = radius.min(1e6).max(1e-3);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..degree {
            let (p, dp) = eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-16 {
            break;
        }
    }

    for root in z.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_with_derivative(&monic, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *root - p / dp;
            if !(next.re.is_finite() && next.im.is_finite()) {
                break;
            }
            *root = next;
        }
    }
    z
}

fn eval_with_derivative(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &coef in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + coef;
    }
    (p, dp)
}

/// Ascending coefficients of `a(x) * b(x)`.
pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
