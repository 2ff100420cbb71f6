use nalgebra::Matrix4;
use num_complex::Complex64;

use super::trajectory::{alpha_at, phase_at};
use super::{check_grid, DriveSpec, GateContext, PopulationTrace, StateDescriptor};
use crate::error::{Error, Result};

/// H⊗H, mapping computational-basis coordinates to X-basis coordinates.
pub(crate) fn hadamard2() -> Matrix4<Complex64> {
    let h = [[1.0, 1.0], [1.0, -1.0]];
    Matrix4::from_fn(|r, c| Complex64::new(0.5 * h[r >> 1][c >> 1] * h[r & 1][c & 1], 0.0))
}

/// Computational-basis |SS⟩.
pub(crate) fn ket_ss() -> [Complex64; 4] {
    let mut v = [Complex64::new(0.0, 0.0); 4];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Reduced two-qubit density matrix (computational basis, index 2·q₁ + q₂
/// with 0 = S and 1 = D) after the spin-dependent displacement `alpha` and
/// entanglement phase `phi`, traced over a thermal mode with mean `nbar`.
///
/// `signs` are the signs of the two ions' Lamb-Dicke parameters.
pub fn spin_density_matrix(
    initial: &[Complex64; 4],
    alpha: Complex64,
    phi: f64,
    nbar: f64,
    signs: (f64, f64),
) -> Matrix4<Complex64> {
    let h = hadamard2();
    let psi_z = nalgebra::Vector4::from_column_slice(initial);
    let c = h * psi_z;
    // spin-dependent displacement is 2α·J for J eigenvalue m
    let big_a2 = 4.0 * alpha.norm_sqr();
    let m = |s: usize| -> f64 {
        let s1 = if s >> 1 == 0 { 1.0 } else { -1.0 };
        let s2 = if s & 1 == 0 { 1.0 } else { -1.0 };
        0.5 * (signs.0 * s1 + signs.1 * s2)
    };
    let rho_x = Matrix4::from_fn(|r, q| {
        let (mr, mq) = (m(r), m(q));
        let k = mr - mq;
        let atten = (-big_a2 * k * k * (nbar + 0.5)).exp();
        c[r] * c[q].conj() * Complex64::from_polar(atten, phi * (mr * mr - mq * mq))
    });
    h * rho_x * h
}

fn descriptor(rho: &Matrix4<Complex64>) -> StateDescriptor {
    StateDescriptor {
        p_ss: rho[(0, 0)].re,
        p_mixed: rho[(1, 1)].re + rho[(2, 2)].re,
        p_dd: rho[(3, 3)].re,
        coherence: rho[(0, 3)],
        mixed_coherence: rho[(1, 2)],
    }
}

fn check_closed_form(ctx: &GateContext) -> Result<(f64, (f64, f64))> {
    let (eta, s1, s2) = ctx.symmetric_pair()?;
    if ctx.qubit_offsets.iter().any(|&d| d != 0.0) {
        return Err(Error::Unsupported(
            "qubit-frequency offsets are only modelled by the Fock-space integrator".into(),
        ));
    }
    Ok((eta, (s1, s2)))
}

/// Populations of the two target ions, both starting in |S⟩.
pub fn ms_populations(ctx: &GateContext, drive: &DriveSpec, t_grid: &[f64]) -> Result<PopulationTrace> {
    ms_populations_from(ctx, drive, t_grid, &ket_ss())
}

/// As [`ms_populations`] from an arbitrary two-qubit initial state.
pub fn ms_populations_from(
    ctx: &GateContext,
    drive: &DriveSpec,
    t_grid: &[f64],
    initial: &[Complex64; 4],
) -> Result<PopulationTrace> {
    let (eta, signs) = check_closed_form(ctx)?;
    drive.validate()?;
    check_grid(t_grid)?;
    let n = t_grid.len();
    let mut trace = PopulationTrace {
        times: t_grid.to_vec(),
        p_ss: Vec::with_capacity(n),
        p_mixed: Vec::with_capacity(n),
        p_dd: Vec::with_capacity(n),
    };
    for &t in t_grid {
        let alpha = alpha_at(drive, ctx.mode_freq, eta, t);
        let phi = phase_at(drive, ctx.mode_freq, eta, t);
        let d = descriptor(&spin_density_matrix(initial, alpha, phi, ctx.nbar, signs));
        trace.p_ss.push(d.p_ss);
        trace.p_mixed.push(d.p_mixed);
        trace.p_dd.push(d.p_dd);
    }
    Ok(trace)
}

/// Reduced two-qubit state at the end of the drive, starting from |SS⟩.
pub fn final_state(ctx: &GateContext, drive: &DriveSpec) -> Result<StateDescriptor> {
    let (eta, signs) = check_closed_form(ctx)?;
    drive.validate()?;
    let t = drive.duration;
    let alpha = alpha_at(drive, ctx.mode_freq, eta, t);
    let phi = phase_at(drive, ctx.mode_freq, eta, t);
    Ok(descriptor(&spin_density_matrix(&ket_ss(), alpha, phi, ctx.nbar, signs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ms::{uniform_grid, ControlState};
    use std::f64::consts::PI;

    fn ctx(nu: f64) -> GateContext {
        GateContext::new(nu, 0.0425, 0.0, ControlState::D)
    }

    #[test]
    fn ideal_pi_gate_flips_both() {
        let nu = 2.0 * PI * 866e3;
        let d0 = 2.0 * PI * 4e3;
        let t = 4.0 * PI / d0;
        let rabi = d0 / (2.0 * 0.0425);
        let s = final_state(&ctx(nu), &DriveSpec::single_tone(nu, d0, rabi, t)).unwrap();
        assert!((s.p_dd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_half_pi_gate_is_bell_state() {
        let nu = 2.0 * PI * 866e3;
        let d0 = 2.0 * PI * 4e3;
        let t = 4.0 * PI / d0;
        let rabi = d0 / (2.0 * 0.0425);
        // control in S: mode shifted up by δ₀, detuning doubles
        let c = GateContext::new(nu + d0, 0.0425, 0.0, ControlState::S);
        let s = final_state(&c, &DriveSpec::single_tone(nu, d0, rabi, t)).unwrap();
        assert!((s.p_ss - 0.5).abs() < 1e-12 && (s.p_dd - 0.5).abs() < 1e-12);
        assert!(s.p_mixed.abs() < 1e-12);
        // (|SS⟩ + i|DD⟩)/√2 has ρ_{SS,DD} = -i/2
        assert!((s.coherence - Complex64::new(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn starts_in_ss_and_conserves_probability() {
        let nu = 2.0 * PI * 866e3;
        let drive = DriveSpec::single_tone(nu, 2.0 * PI * 3e3, 2.0 * PI * 60e3, 600e-6);
        let mut c = ctx(nu);
        c.nbar = 3.0;
        let tr = ms_populations(&c, &drive, &uniform_grid(600e-6, 200)).unwrap();
        assert_eq!(tr.p_ss[0], 1.0);
        for i in 0..tr.len() {
            let s = tr.p_ss[i] + tr.p_mixed[i] + tr.p_dd[i];
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsupported_layouts() {
        let drive = DriveSpec::single_tone(1e6, 1e4, 1e4, 1e-3);
        let mut c = ctx(1e6);
        c.eta = vec![0.1, 0.1, 0.1];
        assert!(matches!(ms_populations(&c, &drive, &[0.0]), Err(Error::Unsupported(_))));
        c.eta = vec![0.1, 0.05];
        assert!(matches!(ms_populations(&c, &drive, &[0.0]), Err(Error::Unsupported(_))));
        let mut c = ctx(1e6);
        c.qubit_offsets = [10.0, 0.0];
        assert!(matches!(ms_populations(&c, &drive, &[0.0]), Err(Error::Unsupported(_))));
    }
}
