use nalgebra::Matrix4;
use num_complex::Complex64;

use super::populations::hadamard2;

/// Controlled-MS gate in block form: the target unitary applied for each
/// state of the control ion.
#[derive(Debug, Clone)]
pub struct CmsDescriptor {
    pub phi_d: f64,
    pub phi_s: f64,
    /// `exp(iΦ_D J_x²)` on the targets, computational basis.
    pub block_d: Matrix4<Complex64>,
    /// `exp(iΦ_S J_x²)` on the targets.
    pub block_s: Matrix4<Complex64>,
    /// (Φ_D, Φ_S) = (π, π/2): the controlled-MS gate up to a local X₁X₃.
    pub canonical: bool,
    /// Both blocks agree up to a global phase.
    pub control_independent: bool,
}

/// `exp(iφ J_x²)` with `J_x = (X₁ + X₂)/2`, in the computational basis.
pub fn xx_phase_gate(phi: f64) -> Matrix4<Complex64> {
    let h = hadamard2();
    let m2 = [1.0, 0.0, 0.0, 1.0]; // J_x² on |++⟩, |+−⟩, |−+⟩, |−−⟩
    let d = Matrix4::from_fn(|r, c| if r == c { Complex64::from_polar(1.0, phi * m2[r]) } else { Complex64::new(0.0, 0.0) });
    h * d * h
}

fn same_up_to_phase(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> bool {
    // phase from the largest element of b
    let (mut idx, mut best) = ((0, 0), 0.0);
    for r in 0..4 {
        for c in 0..4 {
            if b[(r, c)].norm() > best {
                best = b[(r, c)].norm();
                idx = (r, c);
            }
        }
    }
    if best == 0.0 {
        return a.norm() == 0.0;
    }
    let ph = a[(idx.0, idx.1)] / b[(idx.0, idx.1)];
    if (ph.norm() - 1.0).abs() > 1e-9 {
        return false;
    }
    (a - b * ph).norm() < 1e-9
}

fn wrapped_eq(x: f64, y: f64) -> bool {
    let d = (x - y).rem_euclid(2.0 * std::f64::consts::PI);
    d < 1e-9 || 2.0 * std::f64::consts::PI - d < 1e-9
}

pub fn cms_unitary(phi_d: f64, phi_s: f64) -> CmsDescriptor {
    let block_d = xx_phase_gate(phi_d);
    let block_s = xx_phase_gate(phi_s);
    let half_pi = std::f64::consts::FRAC_PI_2;
    CmsDescriptor {
        phi_d,
        phi_s,
        canonical: wrapped_eq(phi_d, std::f64::consts::PI) && wrapped_eq(phi_s, half_pi),
        control_independent: same_up_to_phase(&block_d, &block_s),
        block_d,
        block_s,
    }
}

impl CmsDescriptor {
    /// X₁X₃ on the targets.
    pub fn x1x3() -> Matrix4<Complex64> {
        Matrix4::from_fn(|r, c| if r == 3 - c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// After a local X₁X₃, one control branch is the identity and the other
    /// is `exp(∓i(π/4) X₁X₃)`, each up to a phase. This is the controlled-MS
    /// form `exp(−i(π/8)(I − Z_c) X₁X₃)` up to single-qubit operations.
    pub fn equivalent_to_cms(&self) -> bool {
        let x = Self::x1x3();
        let d = x * self.block_d;
        let s = x * self.block_s;
        let id = Matrix4::<Complex64>::identity();
        let ms = |sign: f64| {
            let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let b = Complex64::new(0.0, sign * std::f64::consts::FRAC_1_SQRT_2);
            id * a + x * b
        };
        let entangling = |m: &Matrix4<Complex64>| same_up_to_phase(m, &ms(1.0)) || same_up_to_phase(m, &ms(-1.0));
        (same_up_to_phase(&d, &id) && entangling(&s)) || (same_up_to_phase(&s, &id) && entangling(&d))
    }
}
