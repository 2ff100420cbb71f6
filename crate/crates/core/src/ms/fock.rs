//! Reference integrator: the two-qubit ⊗ single-mode Schrödinger equation in
//! a truncated Fock basis under the Lamb-Dicke-linearised sideband
//! Hamiltonian
//!
//! `H(t) = −Σ_j (η_j/2) X_j ⊗ (F(t) a† + F*(t) a) + Σ_j (Δ_j/2) Z_j`,
//!
//! with `F(t) = Σ_i Ω_i e^{iφ_i} e^{iδ_i t}`. Optionally the counter-rotating
//! sideband terms at `ν_m + μ_i` are kept as well. Thermal states are
//! handled as a Fock-state mixture.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::populations::{hadamard2, ket_ss};
use super::{check_grid, DriveSpec, GateContext, PopulationTrace};
use crate::error::{Error, Result};

/// Population change tolerated between cutoff c and 2c.
const CONVERGENCE_TOL: f64 = 1e-4;
/// Largest cutoff tried before giving up.
const MAX_CUTOFF: usize = 320;
/// Thermal weights below this are dropped.
const THERMAL_WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOptions {
    /// Keep the sideband terms oscillating at ν_m + μ_i.
    pub counter_rotating: bool,
    /// Initial two-qubit state in the computational basis (default |SS⟩).
    pub initial: [Complex64; 4],
    /// Compare against a run at twice the cutoff.
    pub check_convergence: bool,
}

impl Default for FockOptions {
    fn default() -> Self {
        FockOptions { counter_rotating: false, initial: ket_ss(), check_convergence: true }
    }
}

#[derive(Debug, Clone)]
pub struct FockResult {
    pub trace: PopulationTrace,
    /// Reduced two-qubit density matrix at the last grid time.
    pub final_spin: Matrix4<Complex64>,
    /// Reduced motional density matrix at the last grid time.
    pub final_motion: DMatrix<Complex64>,
    pub cutoff: usize,
    pub converged: bool,
    /// Largest population change against the 2× cutoff run.
    pub convergence_delta: f64,
}

struct Component {
    pops: Vec<[f64; 3]>,
    spin: Matrix4<Complex64>,
    motion: DMatrix<Complex64>,
}

struct Model<'a> {
    drive: &'a DriveSpec,
    mode_freq: f64,
    eta: [f64; 2],
    offsets: [f64; 2],
    counter_rotating: bool,
    cutoff: usize,
    sqrt_n: Vec<f64>,
}

impl Model<'_> {
    fn force(&self, t: f64) -> Complex64 {
        let mut f = Complex64::new(0.0, 0.0);
        for tone in &self.drive.tones {
            let delta = self.mode_freq - tone.detuning;
            f += Complex64::from_polar(tone.rabi, tone.phase + delta * t);
            if self.counter_rotating {
                f += Complex64::from_polar(tone.rabi, (self.mode_freq + tone.detuning) * t - tone.phase);
            }
        }
        f
    }

    /// out = -i H(t) ψ
    fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let nc = self.cutoff;
        let f = self.force(t);
        let fc = f.conj();
        let minus_i = Complex64::new(0.0, -1.0);
        for s in 0..4 {
            let z1 = if s >> 1 == 0 { 1.0 } else { -1.0 };
            let z2 = if s & 1 == 0 { 1.0 } else { -1.0 };
            let diag = 0.5 * (self.offsets[0] * z1 + self.offsets[1] * z2);
            let flip1 = s ^ 2;
            let flip2 = s ^ 1;
            for n in 0..nc {
                let mut acc = psi[s * nc + n] * diag;
                // (F a† + F* a) applied to X_j ψ, X_j flips spin j
                for (flipped, eta) in [(flip1, self.eta[0]), (flip2, self.eta[1])] {
                    let base = flipped * nc;
                    let mut m = Complex64::new(0.0, 0.0);
                    if n > 0 {
                        m += f * psi[base + n - 1] * self.sqrt_n[n];
                    }
                    if n + 1 < nc {
                        m += fc * psi[base + n + 1] * self.sqrt_n[n + 1];
                    }
                    acc -= m * (0.5 * eta);
                }
                out[s * nc + n] = minus_i * acc;
            }
        }
    }

    fn step_size(&self) -> f64 {
        let mut wmax = 0.0_f64;
        let mut fmax = 0.0;
        for tone in &self.drive.tones {
            wmax = wmax.max((self.mode_freq - tone.detuning).abs());
            if self.counter_rotating {
                wmax = wmax.max(self.mode_freq + tone.detuning);
                fmax += tone.rabi;
            }
            fmax += tone.rabi;
        }
        let eta = self.eta[0].abs() + self.eta[1].abs();
        let hnorm = eta * fmax * (self.cutoff as f64).sqrt()
            + 0.5 * (self.offsets[0].abs() + self.offsets[1].abs());
        let mut h = f64::INFINITY;
        if wmax > 0.0 {
            h = h.min(2.0 * std::f64::consts::PI / wmax / 48.0);
        }
        if hnorm > 0.0 {
            h = h.min(0.02 / hnorm);
        }
        h
    }

    fn evolve(&self, spin0: &[Complex64; 4], n0: usize, t_grid: &[f64]) -> Component {
        let nc = self.cutoff;
        let dim = 4 * nc;
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        for s in 0..4 {
            psi[s * nc + n0] = spin0[s];
        }
        let hmax = self.step_size();
        let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        let mut pops = Vec::with_capacity(t_grid.len());
        let mut t = 0.0;
        for &target in t_grid {
            let span = target - t;
            if span > 0.0 {
                let steps = if hmax.is_finite() { (span / hmax).ceil().max(1.0) as usize } else { 1 };
                let h = span / steps as f64;
                for _ in 0..steps {
                    self.apply(t, &psi, &mut k1);
                    for i in 0..dim {
                        tmp[i] = psi[i] + k1[i] * (0.5 * h);
                    }
                    self.apply(t + 0.5 * h, &tmp, &mut k2);
                    for i in 0..dim {
                        tmp[i] = psi[i] + k2[i] * (0.5 * h);
                    }
                    self.apply(t + 0.5 * h, &tmp, &mut k3);
                    for i in 0..dim {
                        tmp[i] = psi[i] + k3[i] * h;
                    }
                    self.apply(t + h, &tmp, &mut k4);
                    for i in 0..dim {
                        psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                    }
                    t += h;
                }
                t = target;
            }
            let p = |s: usize| psi[s * nc..(s + 1) * nc].iter().map(|c| c.norm_sqr()).sum::<f64>();
            pops.push([p(0), p(1) + p(2), p(3)]);
        }
        let spin = Matrix4::from_fn(|r, c| {
            (0..nc).map(|n| psi[r * nc + n] * psi[c * nc + n].conj()).sum()
        });
        let motion = DMatrix::from_fn(nc, nc, |m, n| {
            (0..4).map(|s| psi[s * nc + m] * psi[s * nc + n].conj()).sum()
        });
        Component { pops, spin, motion }
    }
}

/// Truncated thermal distribution (normalised) over Fock states < cutoff.
fn thermal_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    if nbar <= 0.0 {
        return vec![1.0];
    }
    let q = nbar / (nbar + 1.0);
    let mut w: Vec<f64> = (0..cutoff).map(|n| (1.0 - q) * q.powi(n as i32)).collect();
    while w.len() > 1 && *w.last().unwrap() < THERMAL_WEIGHT_FLOOR {
        w.pop();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn run_at(
    ctx: &GateContext,
    drive: &DriveSpec,
    cutoff: usize,
    t_grid: &[f64],
    opts: &FockOptions,
) -> (PopulationTrace, Matrix4<Complex64>, DMatrix<Complex64>) {
    let model = Model {
        drive,
        mode_freq: ctx.mode_freq,
        eta: [ctx.eta[0], ctx.eta[1]],
        offsets: ctx.qubit_offsets,
        counter_rotating: opts.counter_rotating,
        cutoff,
        sqrt_n: (0..=cutoff).map(|n| (n as f64).sqrt()).collect(),
    };
    let weights = thermal_weights(ctx.nbar, cutoff);
    let comps: Vec<Component> = (0..weights.len())
        .into_par_iter()
        .map(|n| model.evolve(&opts.initial, n, t_grid))
        .collect();
    // fixed-order reduction
    let mut trace = PopulationTrace {
        times: t_grid.to_vec(),
        p_ss: vec![0.0; t_grid.len()],
        p_mixed: vec![0.0; t_grid.len()],
        p_dd: vec![0.0; t_grid.len()],
    };
    let mut spin = Matrix4::<Complex64>::zeros();
    let mut motion = DMatrix::<Complex64>::zeros(cutoff, cutoff);
    for (w, c) in weights.iter().zip(&comps) {
        for (i, p) in c.pops.iter().enumerate() {
            trace.p_ss[i] += w * p[0];
            trace.p_mixed[i] += w * p[1];
            trace.p_dd[i] += w * p[2];
        }
        spin += c.spin * Complex64::new(*w, 0.0);
        motion += &c.motion * Complex64::new(*w, 0.0);
    }
    (trace, spin, motion)
}

/// Integrates the truncated-Fock-space dynamics on `t_grid`.
///
/// With `check_convergence` the run is repeated at twice the cutoff; the
/// cutoff is doubled until the population change is at most 1e-4.
pub fn fock_oracle(
    ctx: &GateContext,
    drive: &DriveSpec,
    cutoff: usize,
    t_grid: &[f64],
    opts: &FockOptions,
) -> Result<FockResult> {
    if cutoff < 10 {
        return Err(Error::domain("Fock cutoff must be at least 10"));
    }
    if ctx.eta.len() != 2 {
        return Err(Error::Unsupported("the Fock integrator models two participating ions".into()));
    }
    if !(ctx.nbar >= 0.0) {
        return Err(Error::domain("mean phonon number must be non-negative"));
    }
    drive.validate()?;
    check_grid(t_grid)?;

    let (mut trace, mut spin, mut motion) = run_at(ctx, drive, cutoff, t_grid, opts);
    if !opts.check_convergence {
        return Ok(FockResult {
            trace,
            final_spin: spin,
            final_motion: motion,
            cutoff,
            converged: false,
            convergence_delta: f64::NAN,
        });
    }
    let mut c = cutoff;
    loop {
        let (t2, s2, m2) = run_at(ctx, drive, 2 * c, t_grid, opts);
        let delta = trace.max_abs_diff(&t2);
        if delta <= CONVERGENCE_TOL {
            return Ok(FockResult {
                trace,
                final_spin: spin,
                final_motion: motion,
                cutoff: c,
                converged: true,
                convergence_delta: delta,
            });
        }
        if 4 * c > MAX_CUTOFF {
            return Err(Error::numeric(
                format!("Fock integration not converged at cutoff {}", 2 * c),
                delta,
            ));
        }
        c *= 2;
        trace = t2;
        spin = s2;
        motion = m2;
    }
}

/// Entanglement phase read off a two-qubit state prepared from |SS⟩:
/// `Φ = arg ρˣ_{++,+−}` in the X basis.
pub fn phase_from_spin_state(rho: &Matrix4<Complex64>) -> f64 {
    let h = hadamard2();
    let rho_x = h * rho * h;
    rho_x[(0, 1)].arg()
}

/// Uhlmann fidelity between a motional state and the thermal state of
/// mean `nbar`, truncated to the same dimension.
pub fn motional_fidelity_with_thermal(rho: &DMatrix<Complex64>, nbar: f64) -> f64 {
    let n = rho.nrows();
    let mut w = thermal_weights(nbar, n);
    w.resize(n, 0.0);
    let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| rho[(i, j)] * (sq[i] * sq[j]));
    let eig = SymmetricEigen::new(m);
    let tr: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    tr * tr
}
