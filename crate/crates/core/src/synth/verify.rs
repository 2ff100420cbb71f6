use num_complex::Complex64;

use super::{build_constraints, SynthProblem, SynthSolution};
use crate::error::{Error, Result};
use crate::quadrature::gl12;

/// Allowed disagreement between the closed forms and quadrature, relative to
/// the closure scale for α and absolute (rad, floor 1) for Φ.
const CONSISTENCY_TOL: f64 = 1e-6;
const DEFAULT_SAMPLES: usize = 201;

#[derive(Debug, Clone)]
pub struct ConfigVerification {
    pub index: usize,
    pub mode_freq: f64,
    pub eta: f64,
    pub target: f64,
    /// α_k(T) from quadrature.
    pub alpha_final: Complex64,
    /// Φ_k(T) from quadrature.
    pub phi_final: f64,
    pub times: Vec<f64>,
    pub alpha: Vec<Complex64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub configs: Vec<ConfigVerification>,
    /// max_k |α_k(T)|.
    pub max_closure: f64,
    /// max_k |Φ_k(T) − target_k|.
    pub max_phase_error: f64,
    /// `η·max|Ω|·T`, the reference for closure tolerances.
    pub closure_scale: f64,
}

/// Rate α̇(t) for one configuration and its composite-quadrature integrals.
struct Integrand<'a> {
    rates: Vec<f64>,
    amps: &'a [f64],
    half_eta: f64,
}

impl Integrand<'_> {
    fn rate(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&d, &a) in self.rates.iter().zip(self.amps) {
            acc += Complex64::from_polar(a, d * t);
        }
        acc * self.half_eta
    }

    fn alpha_between(&self, a: f64, b: f64) -> Complex64 {
        if b <= a {
            return Complex64::new(0.0, 0.0);
        }
        gl12().integrate(|t| self.rate(t), a, b, 1)
    }

    /// `4 Im ∫_a^b α̇ α* dt` with `α(a) = alpha_a`.
    fn phase_between(&self, a: f64, b: f64, alpha_a: Complex64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let v = gl12().integrate(|t| self.rate(t) * (alpha_a + self.alpha_between(a, t)).conj(), a, b, 1);
        4.0 * v.im
    }
}

pub fn verify_solution(solution: &SynthSolution, problem: &SynthProblem) -> Result<VerificationReport> {
    verify_solution_with(solution, problem, DEFAULT_SAMPLES)
}

/// Re-integrates every configuration by nested Gauss-Legendre quadrature,
/// independently of the closed forms, and emits `samples` trajectory points.
pub fn verify_solution_with(
    solution: &SynthSolution,
    problem: &SynthProblem,
    samples: usize,
) -> Result<VerificationReport> {
    problem.validate()?;
    if solution.tones.len() != problem.n_tones() {
        return Err(Error::domain("solution and problem have different tone counts"));
    }
    if samples < 2 {
        return Err(Error::domain("at least two trajectory samples are required"));
    }
    let t_end = problem.duration;
    let amps = solution.amplitudes();
    let eta_max = problem.eta_per_mode.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let closure_scale = solution.closure_scale(eta_max);
    let closed = build_constraints(problem)?;
    let closed_alpha = closed.alpha(&amps);
    let closed_phi = closed.phases(&amps);
    let times: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();

    let mut configs = Vec::with_capacity(problem.n_configs());
    for k in 0..problem.n_configs() {
        let nu = problem.effective_modes[k];
        let integrand = Integrand {
            rates: problem.tone_detunings.iter().map(|mu| nu - mu).collect(),
            amps: &amps,
            half_eta: 0.5 * problem.eta_per_mode[k],
        };
        let max_rate = integrand.rates.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        // About one radian of the fastest tone per panel.
        let panels = ((max_rate * t_end).ceil() as usize).max(8);
        let h = t_end / panels as f64;
        let mut edge_alpha = Vec::with_capacity(panels + 1);
        let mut edge_phi = Vec::with_capacity(panels + 1);
        edge_alpha.push(Complex64::new(0.0, 0.0));
        edge_phi.push(0.0);
        for p in 0..panels {
            let (a, b) = (p as f64 * h, if p + 1 == panels { t_end } else { (p + 1) as f64 * h });
            let alpha_a = edge_alpha[p];
            edge_phi.push(edge_phi[p] + integrand.phase_between(a, b, alpha_a));
            edge_alpha.push(alpha_a + integrand.alpha_between(a, b));
        }
        let mut alpha = Vec::with_capacity(samples);
        let mut phi = Vec::with_capacity(samples);
        for &t in &times {
            let p = ((t / h).floor() as usize).min(panels - 1);
            let a = p as f64 * h;
            alpha.push(edge_alpha[p] + integrand.alpha_between(a, t));
            phi.push(edge_phi[p] + integrand.phase_between(a, t, edge_alpha[p]));
        }
        let alpha_final = edge_alpha[panels];
        let phi_final = edge_phi[panels];

        let d_alpha = (alpha_final - closed_alpha[k]).norm();
        let d_phi = (phi_final - closed_phi[k]).abs();
        if d_alpha > CONSISTENCY_TOL * closure_scale.max(f64::MIN_POSITIVE)
            || d_phi > CONSISTENCY_TOL * closed_phi[k].abs().max(1.0)
        {
            return Err(Error::numeric(
                format!(
                    "internal consistency: configuration {k} quadrature differs from closed form (Δα {d_alpha:.3e}, ΔΦ {d_phi:.3e})"
                ),
                d_alpha.max(d_phi),
            ));
        }
        configs.push(ConfigVerification {
            index: k,
            mode_freq: nu,
            eta: problem.eta_per_mode[k],
            target: problem.target_phases[k],
            alpha_final,
            phi_final,
            times: times.clone(),
            alpha,
            phi,
        });
    }
    let max_closure = configs.iter().map(|c| c.alpha_final.norm()).fold(0.0, f64::max);
    let max_phase_error = configs.iter().map(|c| (c.phi_final - c.target).abs()).fold(0.0, f64::max);
    Ok(VerificationReport { configs, max_closure, max_phase_error, closure_scale })
}
