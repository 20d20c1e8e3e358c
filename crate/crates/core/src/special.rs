//! Complex log-Gamma and the Pochhammer symbol.
//!
//! `ln_gamma` uses the Lanczos approximation (g = 7, nine terms) on
//! `Re z >= 1/2` and the reflection formula below it. The imaginary part is
//! not continued analytically across the negative axis; callers only use
//! `exp` of integer combinations, where the branch drops out.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)`; `None` at the poles z = 0, -1, -2, ...
pub fn ln_gamma(z: Complex64) -> Option<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return None;
    }
    if z.re < 0.5 {
        // Γ(z) Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        let rest = ln_gamma(Complex64::new(1.0, 0.0) - z)?;
        return Some(Complex64::new(PI.ln(), 0.0) - s.ln() - rest);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, c) in COEF.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + G + 0.5;
    Some(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln())
}

/// Rising factorial `z (z+1) ... (z+n-1)`; empty product is 1.
///
/// Short products are multiplied out directly, which also handles poles of
/// the Gamma ratio exactly. Long products with a large base use
/// `exp(lnΓ(z+n) - lnΓ(z))`.
pub fn pochhammer(z: Complex64, n: usize) -> Complex64 {
    if n <= 32 || z.norm() < 8.0 {
        return (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| acc * (z + i as f64));
    }
    match (ln_gamma(z + n as f64), ln_gamma(z)) {
        (Some(a), Some(b)) => (a - b).exp(),
        _ => (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| acc * (z + i as f64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn factorials() {
        let mut f = 1.0f64;
        for n in 1..30 {
            f *= n as f64;
            let g = ln_gamma(c(n as f64 + 1.0)).unwrap();
            assert_relative_eq!(g.re, f.ln(), max_relative = 1e-13, epsilon = 1e-13);
        }
        assert_relative_eq!(ln_gamma(c(0.5)).unwrap().re, PI.sqrt().ln(), epsilon = 1e-14);
    }

    #[test]
    fn reflection_and_poles() {
        // Γ(-1/2) = -2√π
        let g = ln_gamma(c(-0.5)).unwrap().exp();
        assert_relative_eq!(g.re, -2.0 * PI.sqrt(), epsilon = 1e-13);
        assert!(ln_gamma(c(0.0)).is_none());
        assert!(ln_gamma(c(-3.0)).is_none());
    }

    #[test]
    fn recurrence_in_the_complex_plane() {
        for &(a, b) in &[(0.3, 1.7), (-2.4, 0.9), (5.5, -3.0), (0.1, 20.0)] {
            let z = Complex64::new(a, b);
            let lhs = (ln_gamma(z + 1.0).unwrap() - ln_gamma(z).unwrap()).exp();
            assert_relative_eq!(lhs.re, z.re, max_relative = 1e-11, epsilon = 1e-11);
            assert_relative_eq!(lhs.im, z.im, max_relative = 1e-11, epsilon = 1e-11);
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(c(2.5), 0), c(1.0));
        assert_eq!(pochhammer(c(3.0), 4), c(360.0));
        assert_relative_eq!(pochhammer(c(0.5), 3).re, 15.0 / 8.0);
        let direct = (0..50).fold(c(1.0), |acc, i| acc * (c(10.25) + i as f64));
        let ratio = pochhammer(c(10.25), 50);
        assert_relative_eq!(ratio.re, direct.re, max_relative = 1e-11);
        assert_eq!(pochhammer(c(-2.0), 5), c(0.0));
    }
}
