use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_trials, process::sample_path, NoiseKind, NoiseModel, NoiseTarget};
use crate::error::{Error, Result};
use crate::seed;

/// Integration steps per drive or idle segment for correlated noise.
const STEPS_PER_SEGMENT: usize = 64;

/// A stretch of constant phase sign on the control qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// +1 while the gate drive is on, −1 during the idle after a flip.
    pub sign: f64,
}

/// N stages of (drive τ, flip, idle τ, flip) with τ = T/N.
#[derive(Debug, Clone, PartialEq)]
pub struct DDSchedule {
    pub n_stages: usize,
    pub stage_drive: f64,
    pub stage_idle: f64,
    /// Instantaneous bit flips on the tweezed ion.
    pub pulse_times: Vec<f64>,
}

impl DDSchedule {
    pub fn total_duration(&self) -> f64 {
        self.n_stages as f64 * (self.stage_drive + self.stage_idle)
    }

    pub fn segments(&self) -> Vec<Segment> {
        let tau = self.stage_drive;
        (0..2 * self.n_stages)
            .map(|j| Segment {
                start: j as f64 * tau,
                end: (j + 1) as f64 * tau,
                sign: if j % 2 == 0 { 1.0 } else { -1.0 },
            })
            .collect()
    }
}

pub fn dd_schedule(gate_time: f64, n_stages: usize) -> Result<DDSchedule> {
    if n_stages == 0 {
        return Err(Error::domain("a decoupled gate needs at least one stage"));
    }
    if !(gate_time > 0.0) || !gate_time.is_finite() {
        return Err(Error::domain("gate time must be positive"));
    }
    let tau = gate_time / n_stages as f64;
    let pulse_times = (0..n_stages)
        .flat_map(|s| [(2 * s + 1) as f64 * tau, (2 * s + 2) as f64 * tau])
        .collect();
    Ok(DDSchedule { n_stages, stage_drive: tau, stage_idle: tau, pulse_times })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceResult {
    /// W = |⟨e^{iφ}⟩|.
    pub coherence: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Phase of one shot: ω_LS·∫ s(t) ε(t) dt over the segments.
/// `signed_exposure` is ∫ s(t) dt, used directly for quasi-static noise so
/// that balanced schedules cancel exactly.
fn shot_phase(
    model: &NoiseModel,
    segments: &[Segment],
    signed_exposure: f64,
    light_shift: f64,
    trial: u64,
    run_seed: u64,
) -> f64 {
    let mut rng = seed::rng(run_seed, model.channel(), trial);
    if model.kind == NoiseKind::QuasiStaticGaussian {
        let eps = sample_path(model, 0.0, 0, &mut rng)[0];
        return light_shift * eps * signed_exposure;
    }
    let t_end = segments.last().map_or(0.0, |s| s.end);
    let seg_len = segments.iter().map(|s| s.end - s.start).fold(f64::INFINITY, f64::min);
    let dt_target = (seg_len / STEPS_PER_SEGMENT as f64).min(model.correlation_time / 16.0);
    let per_seg = (seg_len / dt_target).ceil().max(1.0) as usize;
    // Uniform grid aligned with the (equal-length) segment edges.
    let steps = per_seg * segments.len();
    let dt = t_end / steps as f64;
    let path = sample_path(model, dt, steps, &mut rng);
    let mut phase = 0.0;
    for (j, seg) in segments.iter().enumerate() {
        let a = j * per_seg;
        let mut acc = 0.5 * (path[a] + path[a + per_seg]);
        for x in &path[a + 1..a + per_seg] {
            acc += x;
        }
        phase += seg.sign * acc * dt;
    }
    light_shift * phase
}

/// Coherence of the tweezed control qubit under light-shift noise, with or
/// without the decoupling schedule. `gate_time` sets the bare exposure when
/// `schedule` is `None`.
pub fn control_coherence(
    noise: &NoiseModel,
    schedule: Option<&DDSchedule>,
    gate_time: f64,
    mean_light_shift: f64,
    trials: usize,
    seed: u64,
) -> Result<CoherenceResult> {
    noise.validate()?;
    check_trials(trials)?;
    if noise.target != NoiseTarget::TweezerIntensity {
        return Err(Error::domain("control dephasing is driven by tweezer-intensity noise"));
    }
    let (segments, signed_exposure) = match schedule {
        Some(s) => (s.segments(), s.n_stages as f64 * (s.stage_drive - s.stage_idle)),
        None => {
            if !(gate_time > 0.0) {
                return Err(Error::domain("gate time must be positive"));
            }
            (vec![Segment { start: 0.0, end: gate_time, sign: 1.0 }], gate_time)
        }
    };
    let shots: Vec<Complex64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| Complex64::from_polar(1.0, shot_phase(noise, &segments, signed_exposure, mean_light_shift, i, seed)))
        .collect();
    let n = trials as f64;
    let mean = shots.iter().sum::<Complex64>() / n;
    let w = mean.norm().min(1.0);
    // Spread of the projection on the mean direction.
    let dir = if w > 0.0 { mean / mean.norm() } else { Complex64::new(1.0, 0.0) };
    let var = shots.iter().map(|z| ((z * dir.conj()).re - w).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(CoherenceResult { coherence: w, std_err: (var / n).sqrt(), trials })
}
