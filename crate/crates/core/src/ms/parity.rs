use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{ControlState, StateDescriptor};
use crate::error::{Error, Result};

/// Fitted amplitudes below this are reported as a flat fringe.
const FLAT_FRINGE: f64 = 1e-12;

/// Parity fringe sampled on a phase grid and its sinusoidal fit.
#[derive(Debug, Clone)]
pub struct ParityScan {
    pub phi: Vec<f64>,
    pub parity: Vec<f64>,
    /// A_p in `P = A_p sin(2φ + φ₀) + c`.
    pub amplitude: f64,
    pub phase_offset: f64,
    pub offset: f64,
    pub residual_rms: f64,
    /// Set when the fringe is flat and `amplitude` was forced to zero.
    pub degenerate: bool,
}

/// `⟨σ_φ ⊗ σ_φ⟩` with `σ_φ = cos φ X + sin φ Y`.
pub fn parity(state: &StateDescriptor, phi: f64) -> f64 {
    2.0 * (state.coherence * Complex64::from_polar(1.0, 2.0 * phi)).re + 2.0 * state.mixed_coherence.re
}

/// Samples the parity fringe and least-squares fits `A_p sin(2φ + φ₀) + c`.
pub fn parity_scan(state: &StateDescriptor, phi_grid: &[f64]) -> Result<ParityScan> {
    let distinct = {
        let mut v: Vec<f64> = phi_grid.iter().map(|p| (2.0 * p).rem_euclid(2.0 * std::f64::consts::PI)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        v.len()
    };
    if distinct < 3 {
        return Err(Error::domain("parity scan needs at least three distinct phases"));
    }
    let parity: Vec<f64> = phi_grid.iter().map(|&p| parity(state, p)).collect();
    let n = phi_grid.len();
    let design = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => (2.0 * phi_grid[r]).sin(),
        1 => (2.0 * phi_grid[r]).cos(),
        _ => 1.0,
    });
    let y = DVector::from_vec(parity.clone());
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::numeric(format!("parity fit failed: {e}"), f64::NAN))?;
    let resid = &design * &coef - &y;
    let residual_rms = (resid.norm_squared() / n as f64).sqrt();
    let (a, b) = (coef[0], coef[1]);
    let amp = a.hypot(b);
    let degenerate = amp < FLAT_FRINGE;
    Ok(ParityScan {
        phi: phi_grid.to_vec(),
        parity,
        amplitude: if degenerate { 0.0 } else { amp },
        phase_offset: if degenerate { 0.0 } else { b.atan2(a) },
        offset: coef[2],
        residual_rms,
        degenerate,
    })
}

/// Fidelity bookkeeping for the two control cases: |DD⟩ for D, and
/// `(p_SS + p_DD)/2 + A_p/2` against the Bell target for S.
pub fn state_fidelity(p_ss: f64, p_dd: f64, parity_amplitude: f64, case: ControlState) -> Result<f64> {
    let ok = |p: f64| (-1e-12..=1.0 + 1e-12).contains(&p);
    if !ok(p_ss) || !ok(p_dd) || !ok(p_ss + p_dd) {
        return Err(Error::domain("populations must be probabilities"));
    }
    if !(0.0..=1.0 + 1e-12).contains(&parity_amplitude) {
        return Err(Error::domain("parity amplitude must lie in [0, 1]"));
    }
    Ok(match case {
        ControlState::D => p_dd,
        ControlState::S => 0.5 * (p_ss + p_dd) + 0.5 * parity_amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Vec<f64> {
        (0..64).map(|i| PI * i as f64 / 64.0).collect()
    }

    fn bell(scale: f64) -> StateDescriptor {
        StateDescriptor {
            p_ss: 0.5,
            p_mixed: 0.0,
            p_dd: 0.5,
            coherence: Complex64::new(0.0, -0.5 * scale),
            mixed_coherence: Complex64::new(0.0, 0.0),
        }
    }

    #[test]
    fn ideal_bell_state_has_unit_contrast() {
        let s = parity_scan(&bell(1.0), &grid()).unwrap();
        assert!((s.amplitude - 1.0).abs() < 1e-12);
        assert!(s.phase_offset.abs() < 1e-12);
        assert!(s.residual_rms < 1e-12);
    }

    #[test]
    fn reduced_coherence_scales_contrast() {
        let s = parity_scan(&bell(0.71), &grid()).unwrap();
        assert!((s.amplitude - 0.71).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_is_flat() {
        let st = StateDescriptor {
            p_ss: 0.25,
            p_mixed: 0.5,
            p_dd: 0.25,
            coherence: Complex64::new(0.0, 0.0),
            mixed_coherence: Complex64::new(0.0, 0.0),
        };
        let s = parity_scan(&st, &grid()).unwrap();
        assert_eq!(s.amplitude, 0.0);
        assert!(s.degenerate);
    }

    #[test]
    fn too_few_phases() {
        assert!(parity_scan(&bell(1.0), &[0.0, PI]).is_err());
    }

    #[test]
    fn fidelity_cases() {
        assert_eq!(state_fidelity(0.0, 1.0, 0.0, ControlState::D).unwrap(), 1.0);
        assert_eq!(state_fidelity(0.5, 0.5, 1.0, ControlState::S).unwrap(), 1.0);
        let f = state_fidelity(0.495, 0.495, 0.71, ControlState::S).unwrap();
        assert!((f - 0.85).abs() < 1e-12);
        assert!(state_fidelity(0.7, 0.7, 0.0, ControlState::S).is_err());
    }
}
