//! Multi-tone drive synthesis for n-controlled MS gates.
//!
//! With `n` tweezed controls the gate mode takes one of `n + 1` effective
//! frequencies `ν_k = ν_COM + k·Δν`, one per number `k` of controls in the
//! potential-feeling state. A drive of real, signed tone amplitudes must close
//! every configuration's phase-space loop and give each configuration its
//! target entanglement phase.
//!
//! The closure conditions are linear in the amplitudes and the phases are
//! quadratic forms, so the solver works in the null space of the stacked
//! closure rows and then minimises `Σ Ω_i²` on the quadric intersection.
//!
//! The default tone grid is commensurate with the mode splitting: tones sit at
//! `ν_COM + p·Δν/m` and the duration is `2πm/Δν`, which makes every tone close
//! its own loop in every configuration. See [`commensurate_tone_grid`].

mod ncms;
mod solver;
mod verify;

pub use ncms::{n_controlled_ms, CircuitDescriptor, NControlledResult, NControlledSpec};
pub use solver::{scan_durations, solve_amplitudes, SolveOptions, Tolerances};
pub use verify::{verify_solution, verify_solution_with, ConfigVerification, VerificationReport};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrals::exp_integral;
use crate::ms::{phase_matrix, DriveSpec, Tone};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthProblem {
    /// Effective gate-mode frequency of each configuration, rad/s.
    pub effective_modes: Vec<f64>,
    /// η of the participating ions in each configuration.
    pub eta_per_mode: Vec<f64>,
    pub target_phases: Vec<f64>,
    pub duration: f64,
    /// Symmetric carrier detunings μ_i of the tones, rad/s.
    pub tone_detunings: Vec<f64>,
    /// Budget on `√ΣΩ²`, rad/s. Infinite by default.
    pub max_total_rabi: f64,
}

impl SynthProblem {
    pub fn validate(&self) -> Result<()> {
        let k = self.effective_modes.len();
        if k == 0 {
            return Err(Error::domain("at least one configuration is required"));
        }
        if self.target_phases.len() != k || self.eta_per_mode.len() != k {
            return Err(Error::domain("targets and η must have one entry per configuration"));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::domain("duration must be positive"));
        }
        if self.eta_per_mode.iter().any(|e| !(e.abs() > 0.0) || !e.is_finite()) {
            return Err(Error::domain("η must be nonzero and finite"));
        }
        if self.tone_detunings.iter().chain(&self.effective_modes).chain(&self.target_phases).any(|x| !x.is_finite()) {
            return Err(Error::domain("frequencies and targets must be finite"));
        }
        if !(self.max_total_rabi > 0.0) {
            return Err(Error::domain("Rabi budget must be positive"));
        }
        Ok(())
    }

    pub fn n_configs(&self) -> usize {
        self.effective_modes.len()
    }

    pub fn n_tones(&self) -> usize {
        self.tone_detunings.len()
    }
}

/// Linear closure rows and quadratic phase forms of a [`SynthProblem`].
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    /// `C[k][i] = ∫₀ᵀ e^{i(ν_k − μ_i)t} dt`.
    pub closure: Vec<Vec<Complex64>>,
    /// `Φ_k = Ωᵀ Q_k Ω`.
    pub phase: Vec<DMatrix<f64>>,
    pub eta: Vec<f64>,
}

impl ConstraintSystem {
    /// α_k(T) for signed amplitudes.
    pub fn alpha(&self, amps: &[f64]) -> Vec<Complex64> {
        self.closure
            .iter()
            .zip(&self.eta)
            .map(|(row, &eta)| row.iter().zip(amps).map(|(c, &a)| c * a).sum::<Complex64>() * (0.5 * eta))
            .collect()
    }

    pub fn phases(&self, amps: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(amps);
        self.phase.iter().map(|q| v.dot(&(q * &v))).collect()
    }

    /// Real `2K × M` matrix stacking real and imaginary closure parts.
    pub fn closure_matrix(&self) -> DMatrix<f64> {
        let k = self.closure.len();
        let m = self.closure.first().map_or(0, Vec::len);
        DMatrix::from_fn(2 * k, m, |r, c| {
            let z = self.closure[r / 2][c];
            if r % 2 == 0 {
                z.re
            } else {
                z.im
            }
        })
    }
}

pub fn build_constraints(problem: &SynthProblem) -> Result<ConstraintSystem> {
    problem.validate()?;
    let t = problem.duration;
    let closure = problem
        .effective_modes
        .iter()
        .map(|&nu| problem.tone_detunings.iter().map(|&mu| exp_integral(nu - mu, t)).collect())
        .collect();
    let phase = problem
        .effective_modes
        .iter()
        .zip(&problem.eta_per_mode)
        .map(|(&nu, &eta)| phase_matrix(&problem.tone_detunings, nu, eta, t))
        .collect();
    Ok(ConstraintSystem { closure, phase, eta: problem.eta_per_mode.clone() })
}

/// One synthesized tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthTone {
    pub detuning: f64,
    /// |Ω|, rad/s.
    pub rabi: f64,
    /// ±1; −1 is a force phase of π.
    pub sign: f64,
}

impl SynthTone {
    pub fn signed(&self) -> f64 {
        self.sign * self.rabi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSolution {
    pub tones: Vec<SynthTone>,
    /// max_k |α_k(T)|.
    pub residual_closure: f64,
    /// max_k |Φ_k(T) − target_k|, rad.
    pub residual_phase: f64,
    /// `√ΣΩ²`.
    pub total_rabi: f64,
    pub rabi_sum: f64,
    pub rabi_max: f64,
    pub achieved_duration: f64,
    pub achieved_phases: Vec<f64>,
    /// Dimension of the closure null space the solver searched.
    pub null_space_dim: usize,
}

impl SynthSolution {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.tones.iter().map(SynthTone::signed).collect()
    }

    /// Drive usable by the MS dynamics module.
    pub fn to_drive(&self) -> DriveSpec {
        DriveSpec {
            tones: self
                .tones
                .iter()
                .map(|t| Tone {
                    detuning: t.detuning,
                    rabi: t.rabi,
                    phase: if t.sign < 0.0 { std::f64::consts::PI } else { 0.0 },
                })
                .collect(),
            duration: self.achieved_duration,
        }
    }

    /// Scale of |α| used by the closure tolerance: `η·max|Ω|·T`.
    pub fn closure_scale(&self, eta: f64) -> f64 {
        eta.abs() * self.rabi_max * self.achieved_duration
    }
}

/// Effective modes `ν_COM + k·Δν`, k = 0..=n.
pub fn effective_modes(nu_com: f64, delta_nu: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| nu_com + k as f64 * delta_nu).collect()
}

/// Tones at `ν_COM + p·Δν/m` for `p ∈ [−m, (n+1)m]`, skipping multiples of m
/// (which would sit on a mode). With duration `2πm/Δν` every tone completes
/// a whole number of loops in every configuration.
pub fn commensurate_tone_grid(nu_com: f64, delta_nu: f64, n: usize, m: usize) -> Vec<f64> {
    let m_i = m as i64;
    (-m_i..=(n as i64 + 1) * m_i)
        .filter(|p| p % m_i != 0)
        .map(|p| nu_com + p as f64 * delta_nu / m as f64)
        .collect()
}

/// Duration matched to [`commensurate_tone_grid`].
pub fn commensurate_duration(delta_nu: f64, m: usize) -> f64 {
    2.0 * std::f64::consts::PI * m as f64 / delta_nu
}

/// `2(n+1)` tones spread evenly over `[ν_COM − Δν/2, ν_COM + nΔν + Δν/2]`.
/// Its closure system is square, so for a generic duration it has no null
/// space; it is kept for comparison and for user-supplied grids.
pub fn uniform_tone_grid(nu_com: f64, delta_nu: f64, n: usize) -> Vec<f64> {
    let count = 2 * (n + 1);
    let lo = nu_com - 0.5 * delta_nu;
    let hi = nu_com + (n as f64 + 0.5) * delta_nu;
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}
