//! Monte-Carlo noise studies: gate fidelity under drive, trap and tweezer
//! noise, and dynamical decoupling of the tweezed control qubit.
//!
//! Random numbers come from [`crate::seed`]: each noise model draws from its
//! own channel, keyed by its target and its `seed` field, and trial `i` always
//! uses stream `i`. Sweeping an amplitude therefore reuses the same standard
//! normal draws (common random numbers), which keeps sweeps smooth.

mod dd;
mod gate;
mod process;

pub use dd::{control_coherence, dd_schedule, CoherenceResult, DDSchedule, Segment};
pub use gate::{gate_fidelity_mc, FidelityStats, GateNoiseParams};
pub use process::{sample_path, NOISE_COMPONENTS_1F};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// One Gaussian draw per shot, constant within it.
    QuasiStaticGaussian,
    /// Stationary Ornstein-Uhlenbeck process.
    OrnsteinUhlenbeck,
    /// Sum of log-spaced OU processes approximating a 1/f spectrum between
    /// `correlation_time·1e-4` and `correlation_time`.
    OneOverF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    /// Fractional fluctuation of the gate-drive intensity.
    DriveIntensity,
    /// Additive fluctuation of the axial trap frequency, rad/s.
    TrapFreq,
    /// Fractional fluctuation of the tweezer intensity (light shift and Δν).
    TweezerIntensity,
}

impl NoiseTarget {
    fn tag(self) -> u64 {
        match self {
            NoiseTarget::DriveIntensity => 1,
            NoiseTarget::TrapFreq => 2,
            NoiseTarget::TweezerIntensity => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub target: NoiseTarget,
    /// RMS: fractional for intensities, rad/s for the trap frequency.
    pub amplitude: f64,
    /// Correlation time, s. Ignored for quasi-static noise.
    pub correlation_time: f64,
    /// Channel key; models sharing a target need distinct seeds to be
    /// independent.
    pub seed: u64,
}

impl NoiseModel {
    pub fn quasi_static(target: NoiseTarget, amplitude: f64) -> Self {
        NoiseModel { kind: NoiseKind::QuasiStaticGaussian, target, amplitude, correlation_time: 0.0, seed: 0 }
    }

    pub fn ornstein_uhlenbeck(target: NoiseTarget, amplitude: f64, correlation_time: f64) -> Self {
        NoiseModel { kind: NoiseKind::OrnsteinUhlenbeck, target, amplitude, correlation_time, seed: 0 }
    }

    pub fn one_over_f(target: NoiseTarget, amplitude: f64, correlation_time: f64) -> Self {
        NoiseModel { kind: NoiseKind::OneOverF, target, amplitude, correlation_time, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::domain("noise amplitude must be non-negative"));
        }
        if self.kind != NoiseKind::QuasiStaticGaussian && !(self.correlation_time > 0.0) {
            return Err(Error::domain("correlated noise needs a positive correlation time"));
        }
        Ok(())
    }

    pub(crate) fn channel(&self) -> u64 {
        crate::seed::splitmix64(self.target.tag() << 32 ^ self.seed)
    }
}

pub(crate) fn check_trials(trials: usize) -> Result<()> {
    if trials < 100 {
        return Err(Error::domain("Monte-Carlo estimates need at least 100 trials"));
    }
    Ok(())
}
