//! Closed forms of the time integrals that appear in spin-dependent-force
//! dynamics:
//!
//! - `E(ω, t) = ∫₀ᵗ e^{iωs} ds`
//! - `K(a, b, t) = ∫₀ᵗ dt₁ e^{iat₁} ∫₀^{t₁} dt₂ e^{ibt₂}`
//!
//! Both are evaluated without loss of accuracy as their frequency
//! arguments approach zero.

use num_complex::Complex64;

use crate::quadrature::gl48;

/// Below this |b·t| the difference formula for `K` loses digits and the
/// Taylor expansion in b is used instead.
const K_SERIES_THRESHOLD: f64 = 0.05;
const K_SERIES_TERMS: usize = 11;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// `∫₀ᵗ e^{iωs} ds`; equals `t` at ω = 0.
pub fn exp_integral(omega: f64, t: f64) -> Complex64 {
    let half = 0.5 * omega * t;
    Complex64::from_polar(t * sinc(half), half)
}

/// `∫₀ᵗ s^n e^{ias} ds`.
pub fn moment_integral(n: usize, a: f64, t: f64) -> Complex64 {
    let at = (a * t).abs();
    if at > 2.0 * n as f64 + 24.0 {
        // upward recursion is stable once |a t| dominates n
        let ia = Complex64::new(0.0, a);
        let phase = Complex64::from_polar(1.0, a * t);
        let mut m = exp_integral(a, t);
        for k in 1..=n {
            m = (phase * t.powi(k as i32) - m * k as f64) / ia;
        }
        m
    } else {
        // t^{n+1} ∫₀¹ x^n e^{i a t x} dx, smooth and mildly oscillatory
        let panels = 1 + (at / 24.0) as usize;
        let v = gl48().integrate(
            |x| Complex64::from_polar(x.powi(n as i32), a * t * x),
            0.0,
            1.0,
            panels,
        );
        v * t.powi(n as i32 + 1)
    }
}

/// `K(a, b, t) = ∫₀ᵗ dt₁ e^{iat₁} ∫₀^{t₁} dt₂ e^{ibt₂}`.
pub fn double_exp_integral(a: f64, b: f64, t: f64) -> Complex64 {
    if (b * t).abs() >= K_SERIES_THRESHOLD {
        (exp_integral(a + b, t) - exp_integral(a, t)) / Complex64::new(0.0, b)
    } else {
        // E(b, s) = Σ_k (ib)^k s^{k+1}/(k+1)!
        let ib = Complex64::new(0.0, b);
        let mut coef = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..K_SERIES_TERMS {
            coef /= (k + 1) as f64;
            sum += coef * moment_integral(k + 1, a, t);
            coef *= ib;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn brute_k(a: f64, b: f64, t: f64) -> Complex64 {
        let rule = GaussLegendre::new(40);
        rule.integrate(
            |t1| {
                let inner = rule.integrate(|t2| Complex64::from_polar(1.0, b * t2), 0.0, t1, 8);
                Complex64::from_polar(1.0, a * t1) * inner
            },
            0.0,
            t,
            8,
        )
    }

    #[test]
    fn exp_integral_limits() {
        assert_eq!(exp_integral(0.0, 3.0), Complex64::new(3.0, 0.0));
        let w = 2.0 * std::f64::consts::PI;
        assert!(exp_integral(w, 1.0).norm() < 1e-15);
        let tiny = exp_integral(1e-9, 2.0);
        assert!((tiny - Complex64::new(2.0, 2e-9)).norm() < 1e-15);
    }

    #[test]
    fn moment_integral_branches_agree() {
        // n = 0 reduces to exp_integral
        for a in [0.0, 0.3, 5.0, 80.0] {
            let d = moment_integral(0, a, 1.0) - exp_integral(a, 1.0);
            assert!(d.norm() < 1e-14);
        }
        // integration by parts at n = 1: ∫ s e^{ias} = t e^{iat}/(ia) - E/(ia)
        let (a, t) = (60.0, 1.3);
        let ia = Complex64::new(0.0, a);
        let exact = (Complex64::from_polar(t, a * t) - exp_integral(a, t)) / ia;
        assert!((moment_integral(1, a, t) - exact).norm() < 1e-14);
    }

    #[test]
    fn double_integral_matches_quadrature() {
        let cases = [
            (3.0, -3.0, 2.0),
            (3.0, -2.0, 2.0),
            (0.0, 0.0, 1.5),
            (4.0, 1e-7, 1.0),
            (-7.0, 0.01, 1.0),
            (50.0, -0.02, 1.0),
            (0.5, 11.0, 0.7),
        ];
        for (a, b, t) in cases {
            let k = double_exp_integral(a, b, t);
            let q = brute_k(a, b, t);
            assert!((k - q).norm() < 1e-12 * (1.0 + q.norm()), "{a} {b} {t}: {k} vs {q}");
        }
    }

    #[test]
    fn double_integral_at_zero_is_half_square() {
        let k = double_exp_integral(0.0, 0.0, 2.0);
        assert!((k - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }
}
