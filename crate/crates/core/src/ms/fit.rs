use nalgebra::{DMatrix, DVector};

use super::{ms_populations, DriveSpec, GateContext, PopulationTrace};
use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const STEP_TOL: f64 = 1e-10;

/// Everything the detuning fit holds fixed, plus whether Ω floats too.
#[derive(Debug, Clone)]
pub struct FitModel {
    pub ctx: GateContext,
    /// Rabi frequency, rad/s. Starting value when `fit_rabi` is set.
    pub rabi: f64,
    pub duration: f64,
    pub fit_rabi: bool,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Gate detuning δ, rad/s.
    pub detuning: f64,
    /// 1σ of δ from the residual covariance.
    pub detuning_sigma: f64,
    pub rabi: f64,
    /// Zero when Ω was held fixed.
    pub rabi_sigma: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl FitModel {
    fn drive(&self, p: &[f64]) -> DriveSpec {
        let rabi = if self.fit_rabi { p[1] } else { self.rabi };
        DriveSpec::single_tone(self.ctx.mode_freq, p[0], rabi, self.duration)
    }

    fn residuals(&self, p: &[f64], trace: &PopulationTrace) -> Result<DVector<f64>> {
        let m = ms_populations(&self.ctx, &self.drive(p), &trace.times)?;
        let n = trace.len();
        Ok(DVector::from_fn(3 * n, |i, _| match i / n {
            0 => m.p_ss[i % n] - trace.p_ss[i % n],
            1 => m.p_mixed[i % n] - trace.p_mixed[i % n],
            _ => m.p_dd[i % n] - trace.p_dd[i % n],
        }))
    }

    fn jacobian(&self, p: &[f64], trace: &PopulationTrace) -> Result<DMatrix<f64>> {
        let k = p.len();
        let mut jac = DMatrix::zeros(3 * trace.len(), k);
        for j in 0..k {
            let h = 1e-6 * p[j].abs().max(1.0);
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[j] += h;
            lo[j] -= h;
            let col = (self.residuals(&hi, trace)? - self.residuals(&lo, trace)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }
}

fn flat(v: &[f64]) -> bool {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi - lo < 1e-9
}

/// Nonlinear least squares of the closed-form populations over δ (and Ω
/// when `model.fit_rabi`), by damped Gauss-Newton.
pub fn fit_detuning(trace: &PopulationTrace, initial_guess: f64, model: &FitModel) -> Result<FitResult> {
    if trace.len() < 4 {
        return Err(Error::domain("trace too short to fit"));
    }
    if flat(&trace.p_ss) && flat(&trace.p_mixed) && flat(&trace.p_dd) {
        return Err(Error::Fit { message: "trace is flat; detuning is unidentifiable".into(), residual: 0.0 });
    }
    if !initial_guess.is_finite() || initial_guess == 0.0 {
        return Err(Error::domain("initial detuning guess must be finite and nonzero"));
    }
    let mut p = vec![initial_guess];
    if model.fit_rabi {
        p.push(model.rabi);
    }
    let k = p.len();
    let mut r = model.residuals(&p, trace)?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITER {
        iterations += 1;
        let jac = model.jacobian(&p, trace)?;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = model.residuals(&trial, trace)?;
            let c_trial = r_trial.norm_squared();
            if c_trial <= cost {
                let rel = step.iter().zip(trial.iter()).map(|(s, x)| (s / x.abs().max(1e-300)).abs()).fold(0.0, f64::max);
                let stalled = cost - c_trial <= 1e-15 * cost;
                p = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                converged = rel <= STEP_TOL || stalled;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: at a stationary point if the
            // gradient vanishes relative to the curvature.
            let scale = (cost * jtj.diagonal().max()).sqrt();
            converged = g.amax() <= 1e-8 * scale.max(1e-300);
        }
        if converged || !accepted {
            break;
        }
    }
    let residual_norm = cost.sqrt();
    if !converged {
        return Err(Error::Fit { message: format!("no convergence after {iterations} iterations"), residual: residual_norm });
    }
    let jac = model.jacobian(&p, trace)?;
    let jtj = jac.transpose() * &jac;
    let dof = (r.len() - k).max(1) as f64;
    let cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::Fit { message: "singular normal matrix".into(), residual: residual_norm })?
        * (cost / dof);
    Ok(FitResult {
        detuning: p[0],
        detuning_sigma: cov[(0, 0)].max(0.0).sqrt(),
        rabi: if model.fit_rabi { p[1] } else { model.rabi },
        rabi_sigma: if model.fit_rabi { cov[(1, 1)].max(0.0).sqrt() } else { 0.0 },
        residual_norm,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ms::{uniform_grid, ControlState};
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    fn model(fit_rabi: bool) -> FitModel {
        let eta = 0.0425;
        FitModel {
            ctx: GateContext::new(TWO_PI * 867e3, eta, 0.0, ControlState::D),
            rabi: TWO_PI * 4e3 / (2.0 * eta),
            duration: 500e-6,
            fit_rabi,
        }
    }

    fn synth(m: &FitModel, delta: f64) -> PopulationTrace {
        let drive = DriveSpec::single_tone(m.ctx.mode_freq, delta, m.rabi, m.duration);
        ms_populations(&m.ctx, &drive, &uniform_grid(m.duration, 128)).unwrap()
    }

    #[test]
    fn recovers_noiseless_detuning() {
        let m = model(false);
        let truth = TWO_PI * 4.05e3;
        let f = fit_detuning(&synth(&m, truth), TWO_PI * 4.0e3, &m).unwrap();
        assert!((f.detuning / truth - 1.0).abs() < 1e-8, "{}", f.detuning / TWO_PI);
        assert!(f.residual_norm < 1e-8);
    }

    #[test]
    fn recovers_detuning_and_rabi() {
        let m = model(true);
        let truth = TWO_PI * 8.2e3;
        let f = fit_detuning(&synth(&m, truth), TWO_PI * 8.0e3, &FitModel { rabi: m.rabi * 0.97, ..m.clone() }).unwrap();
        assert!((f.detuning / truth - 1.0).abs() < 1e-6);
        assert!((f.rabi / m.rabi - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_trace_is_an_error() {
        let m = model(false);
        let drive = DriveSpec::single_tone(m.ctx.mode_freq, TWO_PI * 4e3, 0.0, m.duration);
        let t = ms_populations(&m.ctx, &drive, &uniform_grid(m.duration, 64)).unwrap();
        assert!(matches!(fit_detuning(&t, TWO_PI * 4e3, &m), Err(Error::Fit { .. })));
    }
}
