//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the report prints in
//! order. The process fails if any criterion fails, except those listed in
//! `EXPECTED_FAILURES`, which must fail: if one starts passing the run fails
//! too, so the list cannot go stale.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use common::TWO_PI;
use tweezer_gates::chain::{bare_spectrum, conditional_spectrum, mode_spectrum, ChainConfig};
use tweezer_gates::constants::{angular_to_hz, hz_to_angular};
use tweezer_gates::ms::{
    entanglement_phase, fit_detuning, fock_oracle, ms_populations, phase_from_spin_state, state_fidelity,
    uniform_grid, ControlState, DriveSpec, FitModel, FockOptions, GateContext,
};
use tweezer_gates::noise::{
    control_coherence, dd_schedule, gate_fidelity_mc, GateNoiseParams, NoiseModel, NoiseTarget,
};
use tweezer_gates::synth::{
    commensurate_duration, effective_modes, n_controlled_ms, solve_amplitudes, verify_solution, NControlledSpec,
    SolveOptions, SynthProblem,
};

/// Criteria known not to be met, with the reason.
const EXPECTED_FAILURES: &[(u32, &str)] = &[(
    9,
    "minimum-power synthesis needs ~10x less total Rabi than 2π·120 kHz; the reference optimizer and objective are unpublished",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> Result<Outcome, tweezer_gates::Error>;

fn three_ion() -> ChainConfig {
    ChainConfig::new(3, hz_to_angular(360e3)).with_tweezed(&[1]).with_light_shift(hz_to_angular(10.4e6))
}

const DELTA0_HZ: f64 = 4e3;

/// η of an outer ion in the third mode of the bare chain.
fn gate_eta() -> f64 {
    bare_spectrum(&three_ion()).unwrap().lamb_dicke[(2, 0)].abs()
}

fn ideal_drive(nu: f64, eta: f64) -> DriveSpec {
    let d0 = hz_to_angular(DELTA0_HZ);
    DriveSpec::single_tone(nu, d0, d0 / (2.0 * eta), 4.0 * PI / d0)
}

fn c01_mode_frequencies() -> Result<Outcome, tweezer_gates::Error> {
    let s = bare_spectrum(&three_ion())?;
    let lam_err = [1.0, 3.0, 29.0 / 5.0].iter().zip(&s.eigenvalues).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let f: Vec<f64> = s.frequencies.iter().map(|&w| angular_to_hz(w)).collect();
    let oracle = [360e3, 360e3 * 3f64.sqrt(), 360e3 * 5.8f64.sqrt()];
    let oracle_err = f.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let quoted = ((f[1] - 624e3).abs()).max((f[2] - 866e3).abs());
    let pass = lam_err <= 1e-8 && oracle_err <= 1e-6 && (f[1] - 623.5e3).abs() < 50.0 && (f[2] - 866.9e3).abs() < 100.0
        && quoted <= 1e3;
    Ok(outcome(
        pass,
        format!(
            "λ err {lam_err:.1e}; ν₂ = {:.2} kHz, ν₃ = {:.2} kHz; max dev from 624/866 kHz {:.0} Hz",
            f[1] / 1e3,
            f[2] / 1e3,
            quoted
        ),
    ))
}

fn c02_tweezer_shift() -> Result<Outcome, tweezer_gates::Error> {
    let chain = three_ion();
    let b = bare_spectrum(&chain)?.frequencies;
    let t = mode_spectrum(&chain)?.frequencies;
    let third = angular_to_hz(t[2] - b[2]);
    let second = angular_to_hz(t[1] - b[1]);
    let pass = (third - 4e3).abs() <= 0.05 * 4e3 && second.abs() <= 1e-6;
    Ok(outcome(pass, format!("third-mode shift {third:.1} Hz, second-mode shift {second:.1e} Hz")))
}

fn c03_lamb_dicke() -> Result<Outcome, tweezer_gates::Error> {
    let eta = gate_eta();
    let rabi = hz_to_angular(DELTA0_HZ) / (2.0 * eta);
    let rabi_khz = angular_to_hz(rabi) / 1e3;
    let rel = (rabi_khz - 47.4).abs() / 47.4;
    Ok(outcome(
        rel <= 0.02 && (eta - 0.0422).abs() < 0.001,
        format!("η = {eta:.5}, δ₀/(2η) = 2π·{rabi_khz:.2} kHz ({:.2}% from 47.4)", rel * 100.0),
    ))
}

fn c04_conditional_phases() -> Result<Outcome, tweezer_gates::Error> {
    let eta = gate_eta();
    let nu = bare_spectrum(&three_ion())?.frequencies[2];
    let drive = ideal_drive(nu, eta);
    let d0 = hz_to_angular(DELTA0_HZ);
    let mut worst_closed = 0.0_f64;
    let mut worst_fock = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    let grid = [0.0, drive.duration];
    for (shift, target) in [(0.0, PI), (d0, FRAC_PI_2)] {
        let phi = entanglement_phase(&drive, nu + shift, eta)?;
        worst_closed = worst_closed.max((phi - target).abs());
        let tone = [(nu + shift - drive.tones[0].detuning, drive.tones[0].rabi)];
        worst_oracle = worst_oracle.max((common::phase(&tone, eta, drive.duration) - target).abs());
        let ctx = GateContext::new(nu + shift, eta, 0.0, ControlState::D);
        let f = fock_oracle(&ctx, &drive, 30, &grid, &FockOptions { check_convergence: false, ..Default::default() })?;
        let fphi = phase_from_spin_state(&f.final_spin);
        let d = (fphi - target + PI).rem_euclid(TWO_PI) - PI;
        worst_fock = worst_fock.max(d.abs());
    }
    Ok(outcome(
        worst_closed <= 1e-9 && worst_fock <= 1e-3 && worst_oracle <= 1e-9,
        format!("closed form {worst_closed:.1e}, quadrature oracle {worst_oracle:.1e}, Fock cutoff 30 {worst_fock:.1e} rad"),
    ))
}

fn c05_oracle_equivalence() -> Result<Outcome, tweezer_gates::Error> {
    let eta = gate_eta();
    let nu = bare_spectrum(&three_ion())?.frequencies[2];
    let drive = ideal_drive(nu, eta);
    let grid = uniform_grid(drive.duration, 512);
    let mut worst = 0.0_f64;
    for (case, shift) in [(ControlState::D, 0.0), (ControlState::S, hz_to_angular(DELTA0_HZ))] {
        let ctx = GateContext::new(nu + shift, eta, 0.0, case);
        let closed = ms_populations(&ctx, &drive, &grid)?;
        let f = fock_oracle(&ctx, &drive, 30, &grid, &FockOptions::default())?;
        worst = worst.max(f.trace.max_abs_diff(&closed));
    }
    Ok(outcome(worst <= 1e-3, format!("max |Δp| over 512 samples, both cases: {worst:.2e}")))
}

fn c06_fidelity_identity() -> Result<Outcome, tweezer_gates::Error> {
    let f = state_fidelity(0.50, 0.49, 0.71, ControlState::S)?;
    Ok(outcome((f - 0.850).abs() <= 1e-12, format!("F_S = {f:.15}")))
}

fn c07_detuning_fit() -> Result<Outcome, tweezer_gates::Error> {
    let eta = gate_eta();
    let nu = bare_spectrum(&three_ion())?.frequencies[2];
    let d0 = hz_to_angular(DELTA0_HZ);
    let (rabi, duration) = (d0 / (2.0 * eta), 4.0 * PI / d0);
    let mut worst = 0.0_f64;
    let mut got = Vec::new();
    for true_hz in [4.05e3, 8.20e3] {
        let delta = hz_to_angular(true_hz);
        let ctx = GateContext::new(nu, eta, 0.0, ControlState::D);
        let drive = DriveSpec::single_tone(nu, delta, rabi, duration);
        let trace = ms_populations(&ctx, &drive, &uniform_grid(duration, 101))?;
        let model = FitModel { ctx, rabi, duration, fit_rabi: false };
        let r = fit_detuning(&trace, 1.02 * delta, &model)?;
        worst = worst.max((r.detuning - delta).abs() / delta);
        got.push(format!("{:.3}", angular_to_hz(r.detuning)));
    }
    Ok(outcome(worst <= 1e-3, format!("fitted [{}] Hz, worst relative error {worst:.1e}", got.join(", "))))
}

fn c08_small_synthesis() -> Result<Outcome, tweezer_gates::Error> {
    let (nu, dnu, eta) = (hz_to_angular(866.995e3), hz_to_angular(4e3), gate_eta());
    let duration = commensurate_duration(dnu, 2);
    let problem = SynthProblem {
        effective_modes: effective_modes(nu, dnu, 1),
        eta_per_mode: vec![eta; 2],
        target_phases: vec![0.0, FRAC_PI_2],
        duration,
        tone_detunings: vec![nu - 0.5 * dnu, nu + 0.5 * dnu],
        max_total_rabi: f64::INFINITY,
    };
    let sol = solve_amplitudes(&problem, &SolveOptions::default())?;
    let v = verify_solution(&sol, &problem)?;
    // Hand solution: equal amplitudes √3·Δν/(8η), opposite signs.
    let expected = 3f64.sqrt() * dnu / (8.0 * eta);
    let amp_err = sol.tones.iter().map(|t| (t.rabi - expected).abs() / expected).fold(0.0, f64::max);
    let tones: Vec<_> = sol.tones.iter().map(|t| (nu - t.detuning, t.signed())).collect();
    let oracle = [0.0, FRAC_PI_2]
        .iter()
        .enumerate()
        .map(|(k, &target)| {
            let shifted: Vec<_> = tones.iter().map(|&(d, w)| (d + k as f64 * dnu, w)).collect();
            (common::phase(&shifted, eta, duration) - target).abs()
        })
        .fold(0.0, f64::max);
    let closure_rel = v.max_closure / v.closure_scale;
    Ok(outcome(
        closure_rel <= 1e-6 && v.max_phase_error <= 1e-4 && amp_err <= 1e-6 && oracle <= 1e-4,
        format!(
            "|α(T)| {closure_rel:.1e} of scale, phase residual {:.1e} rad, Ω vs hand solution {amp_err:.1e}, oracle phase {oracle:.1e}",
            v.max_phase_error
        ),
    ))
}

fn c09_n10_synthesis() -> Result<Outcome, tweezer_gates::Error> {
    let spec = NControlledSpec::new(10, hz_to_angular(210.7e3), hz_to_angular(4e3), 0.06096, FRAC_PI_2);
    let r = n_controlled_ms(&spec, &SolveOptions::default())?;
    let v = verify_solution(&r.solution, &r.problem)?;
    let s = &r.solution;
    let t_us = s.achieved_duration * 1e6;
    let in_band = (0.3 * 644.0..=2.0 * 644.0).contains(&t_us);
    let verified = v.max_closure <= 1e-6 * v.closure_scale && v.max_phase_error <= 1e-4 && v.configs.len() == 11;
    let khz = |w: f64| angular_to_hz(w) / 1e3;
    let rabi_ok = (60.0..=240.0).contains(&khz(s.total_rabi));
    Ok(outcome(
        in_band && verified && rabi_ok,
        format!(
            "T = {t_us:.0} µs (band {}), verification {}, total Rabi √ΣΩ² = 2π·{:.1} kHz, ΣΩ = 2π·{:.1} kHz, max Ω = 2π·{:.1} kHz (band 60–240: {})",
            if in_band { "ok" } else { "out" },
            if verified { "ok" } else { "failed" },
            khz(s.total_rabi),
            khz(s.rabi_sum),
            khz(s.rabi_max),
            if rabi_ok { "ok" } else { "out" }
        ),
    ))
}

fn noise_params() -> Result<GateNoiseParams, tweezer_gates::Error> {
    let chain = three_ion();
    let cond = conditional_spectrum(&chain, 2)?;
    Ok(GateNoiseParams::ideal(
        chain.axial_freq,
        cond.freq(0).unwrap(),
        cond.per_shift,
        gate_eta(),
        hz_to_angular(DELTA0_HZ),
        ControlState::D,
    ))
}

fn c10_noise() -> Result<Outcome, tweezer_gates::Error> {
    let p = noise_params()?;
    let zero = gate_fidelity_mc(&p, &[], 1000, 1)?;
    let drive = NoiseModel::quasi_static(NoiseTarget::DriveIntensity, 0.03);
    let trap = NoiseModel::quasi_static(NoiseTarget::TrapFreq, hz_to_angular(100.0));
    let both = gate_fidelity_mc(&p, &[drive, trap], 10_000, 1)?;
    let mut monotone = true;
    let mut sweeps = Vec::new();
    for base in [drive, trap] {
        let means: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|s| gate_fidelity_mc(&p, &[NoiseModel { amplitude: base.amplitude * s, ..base }], 4000, 1).map(|r| r.mean))
            .collect::<Result<_, _>>()?;
        monotone &= means.windows(2).all(|w| w[1] < w[0]);
        sweeps.push(format!("{:.4}>{:.4}>{:.4}", means[0], means[1], means[2]));
    }
    Ok(outcome(
        (zero.mean - 1.0).abs() <= 1e-9 && (0.90..=0.97).contains(&both.mean) && monotone,
        format!(
            "zero noise 1−F = {:.1e}; F_D = {:.4} ± {:.4}; sweeps drive {} trap {}",
            1.0 - zero.mean,
            both.mean,
            both.std_err,
            sweeps[0],
            sweeps[1]
        ),
    ))
}

fn c11_decoupling() -> Result<Outcome, tweezer_gates::Error> {
    let (ls, t) = (hz_to_angular(10.4e6), 500e-6);
    let qs = NoiseModel::quasi_static(NoiseTarget::TweezerIntensity, 0.05);
    let mut static_ok = true;
    for n in [1, 2, 4, 8] {
        let r = control_coherence(&qs, Some(&dd_schedule(t, n)?), t, ls, 1000, 3)?;
        static_ok &= (1.0 - r.coherence).abs() <= 3.0 * r.std_err.max(f64::EPSILON);
    }
    let ou = NoiseModel::ornstein_uhlenbeck(NoiseTarget::TweezerIntensity, 1e-3, 0.1);
    let w: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&n| control_coherence(&ou, Some(&dd_schedule(t, n)?), t, ls, 2000, 3).map(|r| r.coherence))
        .collect::<Result<_, _>>()?;
    let increasing = w.windows(2).all(|p| p[1] > p[0]);
    Ok(outcome(
        static_ok && increasing,
        format!(
            "quasi-static W = 1 for N ∈ {{1,2,4,8}}: {static_ok}; OU W = [{}]",
            w.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn c12_determinism() -> Result<Outcome, tweezer_gates::Error> {
    let dir = tempfile::tempdir()?;
    let mut identical = true;
    let mut files = 0;
    for exp in ["modes", "gate", "synth", "noise", "scan"] {
        let mut runs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{exp}-{run}.csv"));
            tweezer_gates::cli::run([
                "tweezer-gates",
                exp,
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "17",
                "--set",
                "noise.trials=1000",
                "--set",
                "noise.dd_trials=500",
            ])?;
            let mut bytes = Vec::new();
            let mut names: Vec<_> = std::fs::read_dir(dir.path())?
                .filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|n| n.starts_with(&format!("{exp}-{run}.")))
                .collect();
            names.sort();
            for n in &names {
                bytes.push((n.replacen(&format!("-{run}."), ".", 1), std::fs::read(dir.path().join(n))?));
            }
            runs.push(bytes);
        }
        files += runs[0].len();
        identical &= runs[0] == runs[1];
    }
    Ok(outcome(identical, format!("{files} output files across 5 experiments compared byte for byte")))
}

fn main() {
    let checks: [(u32, &str, Check); 12] = [
        (1, "mode frequencies", c01_mode_frequencies),
        (2, "tweezer shift", c02_tweezer_shift),
        (3, "Lamb-Dicke / Rabi consistency", c03_lamb_dicke),
        (4, "conditional phases", c04_conditional_phases),
        (5, "oracle equivalence", c05_oracle_equivalence),
        (6, "fidelity identity", c06_fidelity_identity),
        (7, "detuning fit", c07_detuning_fit),
        (8, "synthesis, small instance", c08_small_synthesis),
        (9, "synthesis, n = 10", c09_n10_synthesis),
        (10, "noise Monte Carlo", c10_noise),
        (11, "decoupling", c11_decoupling),
        (12, "determinism", c12_determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in checks {
        let start = Instant::now();
        let o = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let expected = EXPECTED_FAILURES.iter().find(|(i, _)| *i == id);
        println!("{} {id:>2} {name}: {} [{secs:.2} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        match (o.pass, expected) {
            (false, Some((_, why))) => println!("        expected failure: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {id} passed but is listed as an expected failure")),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance: {}", unexpected.join("; "));
        std::process::exit(1);
    }
}
