use rayon::prelude::*;

use super::{check_trials, process::sample_path, NoiseKind, NoiseModel, NoiseTarget};
use crate::error::{Error, Result};
use crate::ms::{final_state, state_fidelity, ControlState, DriveSpec, GateContext};
use crate::seed;

/// Nominal single-tone controlled gate that the noise perturbs.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNoiseParams {
    /// Axial trap frequency ν; trap noise is additive to it.
    pub axial_freq: f64,
    /// Unshifted gate-mode frequency.
    pub mode_freq: f64,
    /// Tweezer shift of the gate mode with the control in S.
    pub delta_nu: f64,
    /// Detuning δ₀ from the unshifted mode.
    pub delta0: f64,
    pub rabi: f64,
    pub eta: f64,
    pub duration: f64,
    pub nbar: f64,
    pub case: ControlState,
}

impl GateNoiseParams {
    /// The nominal gate: Ω = δ₀/(2η) and T = 4π/δ₀.
    pub fn ideal(axial_freq: f64, mode_freq: f64, delta_nu: f64, eta: f64, delta0: f64, case: ControlState) -> Self {
        GateNoiseParams {
            axial_freq,
            mode_freq,
            delta_nu,
            delta0,
            rabi: delta0 / (2.0 * eta),
            eta,
            duration: 4.0 * std::f64::consts::PI / delta0,
            nbar: 0.0,
            case,
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = [self.axial_freq, self.mode_freq, self.delta0, self.duration];
        if pos.iter().any(|x| !(*x > 0.0)) || !(self.rabi >= 0.0) || !(self.nbar >= 0.0) || self.eta == 0.0 {
            return Err(Error::domain("gate parameters must be positive"));
        }
        Ok(())
    }

    /// Fidelity of one shot with fractional drive-intensity error
    /// `eps_drive`, additive trap-frequency error `trap` (rad/s) and fractional
    /// tweezer-intensity error `eps_tweezer`.
    pub fn shot_fidelity(&self, eps_drive: f64, trap: f64, eps_tweezer: f64) -> Result<f64> {
        let scale = 1.0 + trap / self.axial_freq;
        if !(scale > 0.0) {
            return Err(Error::domain("trap-frequency excursion exceeds the trap frequency"));
        }
        // Mode frequencies follow ν; the tweezer shift goes as ω_op²/ν.
        let mode = self.mode_freq * scale;
        let shift = self.delta_nu * (1.0 + eps_tweezer) / scale;
        let eta = self.eta / scale.sqrt();
        let rabi = self.rabi * (1.0 + eps_drive).max(0.0).sqrt();
        let effective = match self.case {
            ControlState::D => mode,
            ControlState::S => mode + shift,
        };
        // The laser stays where it was tuned for the nominal mode.
        let drive = DriveSpec::single_tone(self.mode_freq, self.delta0, rabi, self.duration);
        let ctx = GateContext::new(effective, eta, self.nbar, self.case);
        let st = final_state(&ctx, &drive)?;
        let a_p = (2.0 * st.coherence.norm()).min(1.0);
        state_fidelity(st.p_ss.clamp(0.0, 1.0), st.p_dd.clamp(0.0, 1.0), a_p, self.case)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityStats {
    pub mean: f64,
    pub std: f64,
    pub std_err: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
    pub trials: usize,
    pub per_shot: Vec<f64>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl FidelityStats {
    fn from_shots(per_shot: Vec<f64>) -> Self {
        let n = per_shot.len() as f64;
        let mean = per_shot.iter().sum::<f64>() / n;
        let var = per_shot.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let mut sorted = per_shot.clone();
        sorted.sort_by(f64::total_cmp);
        FidelityStats {
            mean,
            std: var.sqrt(),
            std_err: (var / n).sqrt(),
            p05: percentile(&sorted, 0.05),
            p50: percentile(&sorted, 0.5),
            p95: percentile(&sorted, 0.95),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            trials: per_shot.len(),
            per_shot,
        }
    }
}

/// Monte-Carlo gate fidelity with quasi-static noise drawn once per shot.
pub fn gate_fidelity_mc(
    params: &GateNoiseParams,
    noise_models: &[NoiseModel],
    trials: usize,
    seed: u64,
) -> Result<FidelityStats> {
    params.validate()?;
    check_trials(trials)?;
    for m in noise_models {
        m.validate()?;
        if m.kind != NoiseKind::QuasiStaticGaussian {
            return Err(Error::Unsupported(
                "gate Monte Carlo samples quasi-static noise only; correlated noise belongs to the decoupling study".into(),
            ));
        }
    }
    let shots: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let (mut drive, mut trap, mut tweezer) = (0.0, 0.0, 0.0);
            for m in noise_models {
                let x = sample_path(m, 0.0, 0, &mut seed::rng(seed, m.channel(), i))[0];
                match m.target {
                    NoiseTarget::DriveIntensity => drive += x,
                    NoiseTarget::TrapFreq => trap += x,
                    NoiseTarget::TweezerIntensity => tweezer += x,
                }
            }
            params.shot_fidelity(drive, trap, tweezer)
        })
        .collect::<Result<_>>()?;
    Ok(FidelityStats::from_shots(shots))
}
