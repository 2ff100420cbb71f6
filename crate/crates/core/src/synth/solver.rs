use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{build_constraints, ConstraintSystem, SynthProblem, SynthSolution, SynthTone};
use crate::error::{Error, Result};
use crate::ms::{displacement_trajectory, DriveSpec};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Closure residual relative to `η·max|Ω|·T`.
    pub closure: f64,
    /// Absolute phase residual, rad.
    pub phase: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { closure: 1e-6, phase: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tolerances: Tolerances,
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerances: Tolerances::default(), starts: 8, seed: 0 }
    }
}

/// Closure null-space threshold on singular values, relative to T.
const NULL_TOL: f64 = 1e-9;
const FEAS_ITER: usize = 400;
const DESCENT_ITER: usize = 4000;
const KKT_ITER: usize = 60;

/// Quadratic constraints `wᵀ A_k w = θ_k` in scaled null-space coordinates.
struct Reduced {
    forms: Vec<DMatrix<f64>>,
    targets: Vec<f64>,
    /// Tolerance on the constraint residual in these units.
    tol: f64,
}

impl Reduced {
    fn dim(&self) -> usize {
        self.forms[0].nrows()
    }

    fn residual(&self, w: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.forms.len(),
            self.forms.iter().zip(&self.targets).map(|(a, t)| w.dot(&(a * w)) - t),
        )
    }

    /// Rows `2 (A_k w)ᵀ`.
    fn jacobian(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.forms.len(), self.dim());
        for (k, a) in self.forms.iter().enumerate() {
            j.set_row(k, &(a * w * 2.0).transpose());
        }
        j
    }

    /// Damped min-norm Gauss-Newton onto the constraint set.
    fn project(&self, mut w: DVector<f64>) -> (DVector<f64>, f64) {
        let mut f = self.residual(&w);
        let mut cost = f.norm();
        let mut mu = 1e-8;
        for _ in 0..FEAS_ITER {
            if f.amax() <= self.tol {
                break;
            }
            let j = self.jacobian(&w);
            let jjt = &j * j.transpose();
            let scale = jjt.diagonal().max().max(1e-300);
            let mut improved = false;
            while mu < 1e8 {
                let a = &jjt + DMatrix::identity(jjt.nrows(), jjt.nrows()) * (mu * scale);
                let Some(chol) = a.cholesky() else {
                    mu *= 10.0;
                    continue;
                };
                let trial = &w - j.transpose() * chol.solve(&f);
                let ft = self.residual(&trial);
                if ft.norm() < cost {
                    w = trial;
                    f = ft;
                    cost = f.norm();
                    mu = (mu * 0.1).max(1e-14);
                    improved = true;
                    break;
                }
                mu *= 10.0;
            }
            if !improved {
                break;
            }
        }
        let r = f.amax();
        (w, r)
    }

    /// Tangent-space component of `w` (the gradient of |w|²/2 on the manifold).
    fn tangent(&self, w: &DVector<f64>) -> Option<DVector<f64>> {
        let j = self.jacobian(w);
        let jw = &j * w;
        let y = (&j * j.transpose()).svd(true, true).solve(&jw, 1e-14).ok()?;
        Some(w - j.transpose() * y)
    }

    /// Projected gradient descent on |w|², reprojecting after each step.
    fn descend(&self, mut w: DVector<f64>) -> DVector<f64> {
        let mut step = 0.5;
        for _ in 0..DESCENT_ITER {
            let Some(g) = self.tangent(&w) else { break };
            let norm = w.norm();
            if g.norm() <= 1e-10 * norm.max(1e-300) {
                break;
            }
            let mut moved = false;
            while step > 1e-10 {
                let (trial, r) = self.project(&w - &g * step);
                if r <= self.tol && trial.norm() < norm {
                    w = trial;
                    step = (step * 2.0).min(1.0);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        w
    }

    /// Newton on the KKT system of `min |w|²/2 s.t. wᵀA_k w = θ_k`.
    fn polish(&self, w0: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let k = self.forms.len();
        let cols = |w: &DVector<f64>| {
            let mut a = DMatrix::zeros(d, k);
            for (i, f) in self.forms.iter().enumerate() {
                a.set_column(i, &(f * w));
            }
            a
        };
        let a0 = cols(w0);
        let Ok(mut lam) = a0.clone().svd(true, true).solve(w0, 1e-14) else {
            return w0.clone();
        };
        let kkt_res = |w: &DVector<f64>, lam: &DVector<f64>| {
            let a = cols(w);
            let r1 = w - &a * lam;
            let r2 = self.residual(w);
            (r1, r2)
        };
        let merit = |r: &(DVector<f64>, DVector<f64>)| (r.0.norm_squared() + r.1.norm_squared()).sqrt();
        let mut w = w0.clone();
        let mut res = kkt_res(&w, &lam);
        for _ in 0..KKT_ITER {
            let m0 = merit(&res);
            if m0 <= 1e-15 * w.norm().max(1.0) {
                break;
            }
            let a = cols(&w);
            let mut g = DMatrix::identity(d, d);
            for (i, f) in self.forms.iter().enumerate() {
                g -= f * lam[i];
            }
            let mut jac = DMatrix::zeros(d + k, d + k);
            jac.view_mut((0, 0), (d, d)).copy_from(&g);
            jac.view_mut((0, d), (d, k)).copy_from(&(-&a));
            jac.view_mut((d, 0), (k, d)).copy_from(&(a.transpose() * 2.0));
            let mut rhs = DVector::zeros(d + k);
            rhs.rows_mut(0, d).copy_from(&res.0);
            rhs.rows_mut(d, k).copy_from(&res.1);
            let Some(step) = jac.lu().solve(&(-rhs)) else { break };
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-6 {
                let wn = &w + step.rows(0, d) * t;
                let ln = &lam + step.rows(d, k) * t;
                let rn = kkt_res(&wn, &ln);
                if merit(&rn) < m0 {
                    w = wn;
                    lam = ln;
                    res = rn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        w
    }
}

struct Attempt {
    w: DVector<f64>,
    residual: f64,
}

fn run_start(red: &Reduced, seed: u64, start: usize) -> Attempt {
    let mut rng = seed::rng(seed, 0x5157, start as u64);
    let d = red.dim();
    let amp = red.targets.iter().fold(1.0_f64, |m, t| m.max(t.abs())).sqrt();
    let w0 = DVector::from_fn(d, |_, _| {
        let x: f64 = StandardNormal.sample(&mut rng);
        x * amp
    });
    let (w, r) = red.project(w0);
    if r > red.tol {
        return Attempt { w, residual: r };
    }
    let w = red.descend(w);
    let polished = red.polish(&w);
    let rp = red.residual(&polished).amax();
    if rp <= red.tol && polished.norm() <= w.norm() * (1.0 + 1e-9) {
        Attempt { w: polished, residual: rp }
    } else {
        let r = red.residual(&w).amax();
        Attempt { w, residual: r }
    }
}

/// Orthonormal basis (columns) of the real closure null space.
fn closure_null_space(sys: &ConstraintSystem, duration: f64) -> DMatrix<f64> {
    let r = sys.closure_matrix();
    let m = r.ncols();
    if m == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to square so the SVD returns a full right basis.
    let rows = r.nrows().max(m);
    let mut padded = DMatrix::zeros(rows, m);
    padded.view_mut((0, 0), (r.nrows(), m)).copy_from(&r);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let keep: Vec<usize> = (0..m).filter(|&i| svd.singular_values[i] <= NULL_TOL * duration).collect();
    let mut basis = DMatrix::zeros(m, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &vt.row(i).transpose());
    }
    basis
}

fn assemble(problem: &SynthProblem, sys: &ConstraintSystem, amps: &[f64], null_dim: usize) -> SynthSolution {
    let tones: Vec<SynthTone> = problem
        .tone_detunings
        .iter()
        .zip(amps)
        .map(|(&mu, &a)| SynthTone { detuning: mu, rabi: a.abs(), sign: if a < 0.0 { -1.0 } else { 1.0 } })
        .collect();
    let alpha = sys.alpha(amps);
    let phases = sys.phases(amps);
    let residual_phase =
        phases.iter().zip(&problem.target_phases).map(|(p, t)| (p - t).abs()).fold(0.0, f64::max);
    SynthSolution {
        residual_closure: alpha.iter().map(|a| a.norm()).fold(0.0, f64::max),
        residual_phase,
        total_rabi: amps.iter().map(|a| a * a).sum::<f64>().sqrt(),
        rabi_sum: amps.iter().map(|a| a.abs()).sum(),
        rabi_max: amps.iter().fold(0.0, |m, a| m.max(a.abs())),
        achieved_duration: problem.duration,
        achieved_phases: phases,
        null_space_dim: null_dim,
        tones,
    }
}

/// Minimum-power signed tone amplitudes meeting closure and phase targets.
pub fn solve_amplitudes(problem: &SynthProblem, opts: &SolveOptions) -> Result<SynthSolution> {
    let sys = build_constraints(problem)?;
    if opts.starts == 0 {
        return Err(Error::domain("at least one solver start is required"));
    }
    let m = problem.n_tones();
    if problem.target_phases.iter().all(|&t| t == 0.0) {
        return Ok(assemble(problem, &sys, &vec![0.0; m], m));
    }
    let basis = closure_null_space(&sys, problem.duration);
    let d = basis.ncols();
    if d == 0 {
        return Err(Error::Infeasible(format!(
            "closure: the {} closure conditions leave no free amplitudes among {m} tones at T = {:.6e} s",
            2 * problem.n_configs(),
            problem.duration
        )));
    }
    let reduced: Vec<DMatrix<f64>> = sys.phase.iter().map(|q| basis.transpose() * q * &basis).collect();
    let q_scale = reduced.iter().map(|a| a.amax()).fold(0.0, f64::max);
    if q_scale == 0.0 {
        return Err(Error::Infeasible("phase: no free amplitude couples to any configuration".into()));
    }
    // A nonzero target needs a form with an eigenvalue of the same sign.
    for (k, (a, &t)) in reduced.iter().zip(&problem.target_phases).enumerate() {
        if t == 0.0 {
            continue;
        }
        let eig = a.clone().symmetric_eigenvalues();
        let reach = if t > 0.0 { eig.max() } else { -eig.min() };
        if reach <= 1e-12 * q_scale {
            return Err(Error::Infeasible(format!(
                "phase: configuration {k} cannot reach target {t:.6} rad with the free amplitudes"
            )));
        }
    }
    let red = Reduced {
        forms: reduced.iter().map(|a| a / q_scale).collect(),
        targets: problem.target_phases.clone(),
        tol: 1e-3 * opts.tolerances.phase,
    };

    let attempts: Vec<Attempt> = (0..opts.starts).into_par_iter().map(|s| run_start(&red, opts.seed, s)).collect();
    let best = attempts
        .iter()
        .enumerate()
        .filter(|(_, a)| a.residual <= red.tol)
        .min_by(|(i, a), (j, b)| a.w.norm().total_cmp(&b.w.norm()).then(i.cmp(j)))
        .map(|(_, a)| a);
    let Some(best) = best else {
        let worst = attempts.iter().min_by(|a, b| a.residual.total_cmp(&b.residual)).expect("starts > 0");
        let f = red.residual(&worst.w);
        let k = f.iamax();
        return Err(Error::Infeasible(format!(
            "phase: configuration {k} target {:.6} rad unreachable (best residual {:.3e} rad over {} starts)",
            problem.target_phases[k],
            f[k].abs(),
            opts.starts
        )));
    };
    let amps = &basis * &best.w / q_scale.sqrt();
    let sol = assemble(problem, &sys, amps.as_slice(), d);

    let eta_max = problem.eta_per_mode.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let closure_tol = opts.tolerances.closure * sol.closure_scale(eta_max);
    if sol.residual_closure > closure_tol || sol.residual_phase > opts.tolerances.phase {
        return Err(Error::numeric(
            format!(
                "solution misses tolerances: closure {:.3e} (allowed {:.3e}), phase {:.3e} rad",
                sol.residual_closure, closure_tol, sol.residual_phase
            ),
            sol.residual_phase,
        ));
    }
    if sol.total_rabi > problem.max_total_rabi {
        return Err(Error::Infeasible(format!(
            "Rabi budget: minimum found {:.6e} rad/s exceeds {:.6e} rad/s",
            sol.total_rabi, problem.max_total_rabi
        )));
    }
    Ok(sol)
}

/// Solves each candidate problem and keeps the feasible one with the
/// smallest total Rabi frequency. Ties go to the earlier candidate.
pub fn scan_durations(candidates: &[SynthProblem], opts: &SolveOptions) -> Result<SynthSolution> {
    let mut best: Option<SynthSolution> = None;
    let mut last_err = None;
    for p in candidates {
        match solve_amplitudes(p, opts) {
            Ok(s) => {
                log::debug!("T = {:.3e} s: total Rabi {:.6e} rad/s", p.duration, s.total_rabi);
                if best.as_ref().is_none_or(|b| s.total_rabi < b.total_rabi) {
                    best = Some(s);
                }
            }
            Err(e @ (Error::Infeasible(_) | Error::Numeric { .. })) => {
                log::debug!("T = {:.3e} s: {e}", p.duration);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::domain("no candidate durations")))
}

impl SynthSolution {
    /// α_k(T) and Φ_k(T) re-evaluated through the MS trajectory closed forms.
    pub fn check_against_dynamics(&self, problem: &SynthProblem) -> Result<(f64, f64)> {
        let drive: DriveSpec = self.to_drive();
        let mut closure = 0.0_f64;
        let mut phase = 0.0_f64;
        for ((&nu, &eta), &target) in problem.effective_modes.iter().zip(&problem.eta_per_mode).zip(&problem.target_phases) {
            let tr = displacement_trajectory(&drive, nu, eta, &[0.0, drive.duration])?;
            closure = closure.max(tr.alpha[1].norm());
            phase = phase.max((tr.phi[1] - target).abs());
        }
        Ok((closure, phase))
    }
}
