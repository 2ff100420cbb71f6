use super::{
    commensurate_duration, commensurate_tone_grid, effective_modes, scan_durations, SolveOptions, SynthProblem,
    SynthSolution,
};
use crate::chain::{conditional_spectrum, mode_spectrum, ChainConfig};
use crate::error::{Error, Result};

/// Loop counts m scanned with the commensurate grid; T = 2πm/Δν covers
/// [2π/Δν, 8π/Δν].
const LOOP_CANDIDATES: std::ops::RangeInclusive<usize> = 1..=4;
/// Durations tried when the caller supplies its own tone grid.
const GRID_DURATIONS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct NControlledSpec {
    /// Number of tweezed control ions.
    pub n: usize,
    pub nu_com: f64,
    pub delta_nu: f64,
    /// Entanglement phase for the all-controls-in-S configuration.
    pub target_angle: f64,
    /// COM η of the two target ions, shared by every configuration.
    pub eta: f64,
    /// Per-configuration η from the eigen-solve, overriding `eta`.
    pub eta_per_config: Option<Vec<f64>>,
    /// Caller-supplied tone grid; the commensurate grid is used otherwise.
    pub tone_grid: Option<Vec<f64>>,
    pub max_total_rabi: f64,
}

impl NControlledSpec {
    pub fn new(n: usize, nu_com: f64, delta_nu: f64, eta: f64, target_angle: f64) -> Self {
        NControlledSpec {
            n,
            nu_com,
            delta_nu,
            target_angle,
            eta,
            eta_per_config: None,
            tone_grid: None,
            max_total_rabi: f64::INFINITY,
        }
    }

    /// Takes the base frequency, Δν and η from `gate_mode` (0 is the COM) of a
    /// chain with `n` tweezed ions and two untweezed targets. The conditional
    /// frequencies are linearised to `ν(0) + k·Δν`; with `exact_eta` each
    /// configuration gets the target η of its own eigen-solve.
    pub fn from_chain(chain: &ChainConfig, gate_mode: usize, target_angle: f64, exact_eta: bool) -> Result<Self> {
        let tweezed = chain.tweezed_indices();
        let n = tweezed.len();
        if n == 0 || chain.n_ions != n + 2 {
            return Err(Error::domain(format!(
                "an n-controlled gate needs n ≥ 1 tweezed ions plus two targets, got {} tweezed of {}",
                n, chain.n_ions
            )));
        }
        let target_ion = (0..chain.n_ions).find(|i| !chain.tweezer_flags[*i]).expect("two untweezed ions");
        let cond = conditional_spectrum(chain, gate_mode)?;
        let nu_com = cond.freq(0).expect("k = 0 present");
        let mut bare = chain.clone();
        bare.tweezer_flags = vec![false; chain.n_ions];
        let eta = mode_spectrum(&bare)?.lamb_dicke[(gate_mode, target_ion)];
        let eta_per_config = if exact_eta {
            let mut v = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let mut c = chain.clone();
                c.tweezer_flags = vec![false; chain.n_ions];
                for &i in &tweezed[..k] {
                    c.tweezer_flags[i] = true;
                }
                v.push(mode_spectrum(&c)?.lamb_dicke[(gate_mode, target_ion)]);
            }
            Some(v)
        } else {
            None
        };
        if !(cond.per_shift > 0.0) {
            return Err(Error::domain("tweezers produce no shift of the gate mode; set a positive light shift"));
        }
        Ok(NControlledSpec { eta_per_config, ..NControlledSpec::new(n, nu_com, cond.per_shift, eta, target_angle) })
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if !(self.nu_com > 0.0) || !(self.delta_nu > 0.0) {
            return Err(Error::domain("ν_COM and Δν must be positive"));
        }
        if let Some(v) = &self.eta_per_config {
            if v.len() != self.n + 1 {
                return Err(Error::domain("per-configuration η needs n + 1 entries"));
            }
        }
        Ok(())
    }

    fn problem(&self, tones: Vec<f64>, duration: f64) -> SynthProblem {
        let mut targets = vec![0.0; self.n + 1];
        targets[self.n] = self.target_angle;
        SynthProblem {
            effective_modes: effective_modes(self.nu_com, self.delta_nu, self.n),
            eta_per_mode: self.eta_per_config.clone().unwrap_or_else(|| vec![self.eta; self.n + 1]),
            target_phases: targets,
            duration,
            tone_detunings: tones,
            max_total_rabi: self.max_total_rabi,
        }
    }

    /// Candidate problems of the duration scan.
    pub fn candidates(&self) -> Result<Vec<SynthProblem>> {
        self.validate()?;
        Ok(match &self.tone_grid {
            None => LOOP_CANDIDATES
                .filter_map(|m| {
                    let tones = commensurate_tone_grid(self.nu_com, self.delta_nu, self.n, m);
                    (!tones.is_empty()).then(|| self.problem(tones, commensurate_duration(self.delta_nu, m)))
                })
                .collect(),
            Some(grid) => {
                let (lo, hi) = (commensurate_duration(self.delta_nu, 1), commensurate_duration(self.delta_nu, 4));
                (0..GRID_DURATIONS)
                    .map(|i| self.problem(grid.clone(), lo + (hi - lo) * i as f64 / (GRID_DURATIONS - 1) as f64))
                    .collect()
            }
        })
    }
}

/// How the synthesized drive acts as a gate.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDescriptor {
    pub n_controls: usize,
    pub target_angle: f64,
    /// `(k, Φ_k)` for each number k of controls in S.
    pub configuration_phases: Vec<(usize, f64)>,
    pub summary: String,
}

#[derive(Debug, Clone)]
pub struct NControlledResult {
    pub solution: SynthSolution,
    /// The problem instance the returned solution solves.
    pub problem: SynthProblem,
    pub circuit: CircuitDescriptor,
}

/// Synthesizes an n-controlled MS drive: zero phase for every configuration
/// except all controls in S, which receives `target_angle`.
pub fn n_controlled_ms(spec: &NControlledSpec, opts: &SolveOptions) -> Result<NControlledResult> {
    let candidates = spec.candidates()?;
    let solution = scan_durations(&candidates, opts)?;
    let problem = candidates
        .into_iter()
        .find(|p| p.duration == solution.achieved_duration)
        .expect("solution comes from a candidate");
    let summary = format!(
        "{n}-controlled XX({a:.6}) on the two targets: the entangling phase is applied only when all {n} controls are in S. \
         Equivalent up to single-qubit rotations to an ({m})-controlled Toffoli.",
        n = spec.n,
        a = spec.target_angle,
        m = spec.n.saturating_sub(1)
    );
    let circuit = CircuitDescriptor {
        n_controls: spec.n,
        target_angle: spec.target_angle,
        configuration_phases: solution.achieved_phases.iter().copied().enumerate().collect(),
        summary,
    };
    Ok(NControlledResult { solution, problem, circuit })
}
