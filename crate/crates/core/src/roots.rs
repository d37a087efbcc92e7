//! Polynomial root finding over the complex numbers.
//!
//! Durand-Kerner (Weierstrass) simultaneous iteration; adequate for the
//! desk-scale degrees this crate works with and fully deterministic.

use num_complex::Complex64;

/// All roots of the polynomial with the given coefficients in descending
/// powers (`c[0] z^n + ... + c[n]`).  Leading zeros are trimmed with a
/// relative tolerance.  Returns an empty vector for constants.
pub fn polynomial_roots(coeffs_desc: &[Complex64]) -> Vec<Complex64> {
    let scale = coeffs_desc.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let first = coeffs_desc
        .iter()
        .position(|c| c.norm() > 1e-14 * scale)
        .unwrap_or(coeffs_desc.len());
    let trimmed = &coeffs_desc[first..];
    if trimmed.len() <= 1 {
        return Vec::new();
    }
    let lead = trimmed[0];
    let monic: Vec<Complex64> = trimmed.iter().map(|c| c / lead).collect();
    let n = monic.len() - 1;

    // Cauchy bound for the root radius.
    let radius = 1.0 + monic.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|j| {
            Complex64::from_polar(
                radius * 0.7,
                2.0 * std::f64::consts::PI * j as f64 / n as f64 + 0.41,
            )
        })
        .collect();

    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for j in 0..n {
            let zj = roots[j];
            let mut denom = Complex64::new(1.0, 0.0);
            for (i, &zi) in roots.iter().enumerate() {
                if i != j {
                    denom *= zj - zi;
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = horner(&monic, zj) / denom;
            roots[j] = zj - step;
            max_step = max_step.max(step.norm() / (1.0 + roots[j].norm()));
        }
        if max_step < 1e-14 {
            break;
        }
    }
    roots
}

/// Horner evaluation, descending coefficients.
pub fn horner(coeffs_desc: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs_desc {
        acc = acc * z + c;
    }
    acc
}

/// Synthetic division by (z - root); returns (quotient, remainder).
pub fn deflate(coeffs_desc: &[Complex64], root: Complex64) -> (Vec<Complex64>, Complex64) {
    let mut out = Vec::with_capacity(coeffs_desc.len().saturating_sub(1));
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &c) in coeffs_desc.iter().enumerate() {
        acc = acc * root + c;
        if i + 1 < coeffs_desc.len() {
            out.push(acc);
        }
    }
    (out, acc)
}
