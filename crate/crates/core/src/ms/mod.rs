//! Mølmer-Sørensen dynamics of two driven ions coupled to one motional mode.
//!
//! Sign conventions used throughout:
//!
//! - A tone at symmetric detuning μ from the carrier has gate detuning
//!   `δ = ν_m − μ` from the mode. A mode shifted upward by the tweezer
//!   therefore sees a larger detuning.
//! - The per-ion phase-space displacement is
//!   `α(t) = (η/2) Σ_i Ω_i e^{iφ_i} ∫₀ᵗ e^{iδ_i t'} dt'`.
//! - The entanglement phase is `Φ(t) = 4·Im ∫₀ᵗ α̇ α* dt'`, which equals
//!   `η²Ω²T/δ` for one tone after whole loops, and the spin propagator at
//!   closure is `exp(iΦ J_x²)` with `J_x = (X₁ + X₂)/2`.

mod cms;
mod fit;
mod fock;
mod parity;
mod populations;
mod trajectory;

pub use cms::{cms_unitary, xx_phase_gate, CmsDescriptor};
pub use fit::{fit_detuning, FitModel, FitResult};
pub use fock::{
    fock_oracle, motional_fidelity_with_thermal, phase_from_spin_state, FockOptions, FockResult,
};
pub use parity::{parity, parity_scan, state_fidelity, ParityScan};
pub use populations::{final_state, ms_populations, spin_density_matrix};
pub use trajectory::{displacement_trajectory, entanglement_phase, phase_matrix};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One bichromatic tone pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    /// Symmetric detuning μ of the red and blue tones from the carrier, rad/s.
    pub detuning: f64,
    /// Rabi frequency Ω per tone, rad/s.
    pub rabi: f64,
    /// Phase of the spin-dependent force, rad.
    pub phase: f64,
}

/// A multi-tone drive of fixed duration.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub tones: Vec<Tone>,
    /// Total duration T, s.
    pub duration: f64,
}

impl DriveSpec {
    /// The standard MS drive: one tone at gate detuning δ below the mode.
    pub fn single_tone(mode_freq: f64, gate_detuning: f64, rabi: f64, duration: f64) -> Self {
        DriveSpec {
            tones: vec![Tone { detuning: mode_freq - gate_detuning, rabi, phase: 0.0 }],
            duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::domain("drive duration must be positive"));
        }
        for t in &self.tones {
            if !(t.rabi >= 0.0) || !t.detuning.is_finite() || !t.phase.is_finite() {
                return Err(Error::domain("tone Rabi frequencies must be non-negative and finite"));
            }
        }
        Ok(())
    }

    /// Scales every tone amplitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.tones {
            t.rabi *= factor;
        }
        out
    }
}

/// State of the tweezed control ion. It spectates; its only effect is the
/// mode frequency seen by the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlState {
    /// Feels the optical potential; the gate mode is shifted.
    S,
    /// Unaffected by the tweezer.
    D,
}

/// Everything about the two target ions and the gate mode that the
/// dynamics need.
#[derive(Debug, Clone, PartialEq)]
pub struct GateContext {
    /// Gate-mode frequency ν_m seen by the drive (already control-conditioned).
    pub mode_freq: f64,
    /// Lamb-Dicke parameter of each participating ion in the gate mode.
    pub eta: Vec<f64>,
    /// Mean thermal phonon number of the gate mode.
    pub nbar: f64,
    pub control_state: ControlState,
    /// Static qubit-frequency offsets of the two ions, rad/s.
    pub qubit_offsets: [f64; 2],
}

impl GateContext {
    pub fn new(mode_freq: f64, eta: f64, nbar: f64, control_state: ControlState) -> Self {
        GateContext {
            mode_freq,
            eta: vec![eta, eta],
            nbar,
            control_state,
            qubit_offsets: [0.0; 2],
        }
    }

    /// Checks the two-ion, equal-|η| layout the closed form supports and
    /// returns (|η|, sign of ion 1, sign of ion 2).
    pub(crate) fn symmetric_pair(&self) -> Result<(f64, f64, f64)> {
        if self.eta.len() != 2 {
            return Err(Error::Unsupported(format!(
                "closed-form dynamics cover two participating ions, got {}",
                self.eta.len()
            )));
        }
        let (a, b) = (self.eta[0], self.eta[1]);
        let mag = a.abs();
        if (b.abs() - mag).abs() > 1e-12 * mag.max(1e-300) {
            return Err(Error::Unsupported("participating ions must have equal |η|".into()));
        }
        if !(self.nbar >= 0.0) {
            return Err(Error::domain("mean phonon number must be non-negative"));
        }
        let sign = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
        Ok((mag, sign(a), sign(b)))
    }
}

/// Phase-space trajectory of a single mode.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    /// Per-ion displacement α(t).
    pub alpha: Vec<Complex64>,
    /// Accumulated entanglement phase Φ(t), rad.
    pub phi: Vec<f64>,
}

/// Two-qubit populations of the target ions over time.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub p_ss: Vec<f64>,
    /// p_SD + p_DS.
    pub p_mixed: Vec<f64>,
    pub p_dd: Vec<f64>,
}

impl PopulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest absolute population difference to another trace on the same grid.
    pub fn max_abs_diff(&self, other: &PopulationTrace) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.len().min(other.len()) {
            m = m
                .max((self.p_ss[i] - other.p_ss[i]).abs())
                .max((self.p_mixed[i] - other.p_mixed[i]).abs())
                .max((self.p_dd[i] - other.p_dd[i]).abs());
        }
        m
    }
}

/// Reduced two-qubit state after the gate, enough for parity and fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDescriptor {
    pub p_ss: f64,
    pub p_mixed: f64,
    pub p_dd: f64,
    /// ρ_{SS,DD}.
    pub coherence: Complex64,
    /// ρ_{SD,DS}.
    pub mixed_coherence: Complex64,
}

/// `n` uniform samples over [0, duration], endpoints included.
pub fn uniform_grid(duration: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| duration * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default number of samples per trace.
pub const DEFAULT_SAMPLES: usize = 512;

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::domain("time grid is empty"));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::domain("time grid must start at 0"));
    }
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::domain("time grid must be sorted"));
    }
    Ok(())
}
