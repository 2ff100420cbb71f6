//! The five experiments. Each returns its tables (the first is the summary)
//! and a one-line description of the result.

use std::f64::consts::PI;

use log::info;

use super::config::RunConfig;
use super::emit::{Cell, Table};
use crate::chain::{bare_spectrum, conditional_spectrum, mode_spectrum, ChainConfig};
use crate::constants::{angular_to_hz, hz_to_angular};
use crate::error::{Error, Result};
use crate::ms::{
    final_state, fit_detuning, fock_oracle, ms_populations, parity_scan, state_fidelity, uniform_grid, ControlState,
    DriveSpec, FitModel, FockOptions, GateContext, displacement_trajectory,
};
use crate::noise::{control_coherence, dd_schedule, gate_fidelity_mc, GateNoiseParams, NoiseTarget};
use crate::synth::{n_controlled_ms, verify_solution_with, NControlledSpec, SolveOptions, Tolerances};

pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: String,
}

fn hz(w: f64) -> Cell {
    Cell::Float(angular_to_hz(w))
}

fn parse_case(s: &str) -> Result<ControlState> {
    match s.trim() {
        "S" | "s" => Ok(ControlState::S),
        "D" | "d" => Ok(ControlState::D),
        other => Err(Error::Config(format!("unknown control case `{other}`, expected S or D"))),
    }
}

fn case_name(c: ControlState) -> &'static str {
    match c {
        ControlState::S => "S",
        ControlState::D => "D",
    }
}

pub fn modes(cfg: &RunConfig) -> Result<Outcome> {
    let chain = cfg.chain.to_chain()?;
    let spec = mode_spectrum(&chain)?;
    let bare = bare_spectrum(&chain)?;
    let n = chain.n_ions;
    let mut cols = vec!["mode", "freq_hz", "bare_freq_hz", "shift_hz", "eigenvalue"];
    let b_names: Vec<String> = (0..n).map(|i| format!("b_{i}")).collect();
    let eta_names: Vec<String> = (0..n).map(|i| format!("eta_{i}")).collect();
    cols.extend(b_names.iter().map(String::as_str));
    cols.extend(eta_names.iter().map(String::as_str));
    let mut t = Table::new(None, &cols);
    for m in 0..n {
        let mut row = vec![
            Cell::from(m),
            hz(spec.frequencies[m]),
            hz(bare.frequencies[m]),
            hz(spec.frequencies[m] - bare.frequencies[m]),
            spec.eigenvalues[m].into(),
        ];
        row.extend((0..n).map(|i| Cell::from(spec.mode_matrix[(m, i)])));
        row.extend((0..n).map(|i| Cell::from(spec.lamb_dicke[(m, i)])));
        t.push(row);
    }
    let gm = cfg.chain.gate_mode;
    let cond = conditional_spectrum(&chain, gm)?;
    let mut c = Table::new(Some("conditional"), &["k", "freq_hz", "shift_hz"]);
    for &(k, f) in &cond.conditional_freqs {
        c.push(vec![k.into(), hz(f), hz(f - cond.conditional_freqs[0].1)]);
    }
    let freqs: Vec<String> = spec.frequencies.iter().map(|&f| format!("{:.1}", angular_to_hz(f) / 1e3)).collect();
    let summary = format!(
        "modes: {} ions, frequencies [{}] kHz, gate mode {} shift {:.1} Hz per tweezed ion",
        n,
        freqs.join(", "),
        gm,
        angular_to_hz(cond.per_shift)
    );
    Ok(Outcome { tables: vec![t, c], summary })
}

/// Gate mode, target-ion η and the conditional mode frequencies.
struct GateSetup {
    eta: [f64; 2],
    freq_d: f64,
    freq_s: f64,
}

fn gate_setup(chain: &ChainConfig, gate_mode: usize) -> Result<GateSetup> {
    let targets: Vec<usize> = (0..chain.n_ions).filter(|&i| !chain.tweezer_flags[i]).take(2).collect();
    if targets.len() < 2 {
        return Err(Error::domain("the gate needs two untweezed target ions"));
    }
    let bare = bare_spectrum(chain)?;
    if gate_mode >= bare.n_modes() {
        return Err(Error::domain(format!("gate mode {gate_mode} out of range")));
    }
    let cond = conditional_spectrum(chain, gate_mode)?;
    let n = cond.conditional_freqs.len() - 1;
    Ok(GateSetup {
        eta: [bare.lamb_dicke[(gate_mode, targets[0])], bare.lamb_dicke[(gate_mode, targets[1])]],
        freq_d: cond.freq(0).expect("k = 0"),
        freq_s: cond.freq(n).expect("k = n"),
    })
}

/// Nominal drive: (δ₀, Ω, T) in rad/s and s.
fn nominal_drive(cfg: &RunConfig, eta: f64) -> Result<(f64, f64, f64)> {
    let g = &cfg.gate;
    if !(g.delta0_hz > 0.0) {
        return Err(Error::Config("gate.delta0_hz must be positive".into()));
    }
    let delta0 = hz_to_angular(g.delta0_hz);
    let rabi = g.rabi_hz.map_or(delta0 / (2.0 * eta.abs()), hz_to_angular);
    let duration = g.duration_us.map_or(4.0 * PI / delta0, |us| us * 1e-6);
    Ok((delta0, rabi, duration))
}

pub fn gate(cfg: &RunConfig) -> Result<Outcome> {
    let chain = cfg.chain.to_chain()?;
    let setup = gate_setup(&chain, cfg.chain.gate_mode)?;
    let (delta0, rabi, duration) = nominal_drive(cfg, setup.eta[0])?;
    let g = &cfg.gate;
    if g.samples < 2 {
        return Err(Error::Config("gate.samples must be at least 2".into()));
    }
    let drive = DriveSpec::single_tone(setup.freq_d, delta0, rabi, duration);
    let grid = uniform_grid(duration, g.samples);
    let phase_grid: Vec<f64> = (0..g.phase_samples).map(|i| PI * i as f64 / g.phase_samples as f64).collect();

    let mut summary = Table::new(
        None,
        &[
            "case", "mode_freq_hz", "detuning_hz", "rabi_hz", "duration_s", "phi_rad", "p_ss", "p_mixed", "p_dd",
            "parity_amplitude", "parity_phase_rad", "fidelity", "fock_max_diff", "fit_detuning_hz", "fit_sigma_hz",
        ],
    );
    let mut traces = Table::new(Some("trace"), &["case", "t_s", "p_ss", "p_mixed", "p_dd"]);
    let mut traj = Table::new(Some("trajectory"), &["t_s", "re_alpha", "im_alpha", "phi_rad", "config_k"]);
    let mut fringe = Table::new(Some("parity"), &["case", "phase_rad", "parity"]);
    let mut notes = Vec::new();

    for (k, name) in g.cases.iter().enumerate() {
        let case = parse_case(name)?;
        let mode = match case {
            ControlState::D => setup.freq_d,
            ControlState::S => setup.freq_s,
        };
        let ctx = GateContext { eta: setup.eta.to_vec(), ..GateContext::new(mode, setup.eta[0], g.nbar, case) };
        let trace = ms_populations(&ctx, &drive, &grid)?;
        for i in 0..trace.len() {
            traces.push(vec![
                case_name(case).into(),
                trace.times[i].into(),
                trace.p_ss[i].into(),
                trace.p_mixed[i].into(),
                trace.p_dd[i].into(),
            ]);
        }
        let tr = displacement_trajectory(&drive, mode, setup.eta[0], &grid)?;
        for i in 0..grid.len() {
            traj.push(vec![tr.times[i].into(), tr.alpha[i].re.into(), tr.alpha[i].im.into(), tr.phi[i].into(), k.into()]);
        }
        let st = final_state(&ctx, &drive)?;
        let (amp, offset) = if g.phase_samples > 0 {
            let scan = parity_scan(&st, &phase_grid)?;
            for (p, v) in scan.phi.iter().zip(&scan.parity) {
                fringe.push(vec![case_name(case).into(), (*p).into(), (*v).into()]);
            }
            (scan.amplitude, scan.phase_offset)
        } else {
            (2.0 * st.coherence.norm(), f64::NAN)
        };
        let fidelity = state_fidelity(st.p_ss.clamp(0.0, 1.0), st.p_dd.clamp(0.0, 1.0), amp.min(1.0), case)?;
        let fock_diff = if g.fock_check {
            let f = fock_oracle(&ctx, &drive, g.fock_cutoff, &grid, &FockOptions::default())?;
            f.trace.max_abs_diff(&trace)
        } else {
            f64::NAN
        };
        let (fit_d, fit_s) = if g.fit {
            let model = FitModel { ctx: ctx.clone(), rabi, duration, fit_rabi: false };
            let guess = (mode - drive.tones[0].detuning) * 1.02;
            let r = fit_detuning(&trace, guess, &model)?;
            (angular_to_hz(r.detuning), angular_to_hz(r.detuning_sigma))
        } else {
            (f64::NAN, f64::NAN)
        };
        let phi = tr.phi[tr.phi.len() - 1];
        info!("case {}: Φ = {phi:.9} rad, fidelity {fidelity:.6}", case_name(case));
        notes.push(format!("{} Φ={:.6} F={:.4}", case_name(case), phi, fidelity));
        summary.push(vec![
            case_name(case).into(),
            hz(mode),
            hz(mode - drive.tones[0].detuning),
            hz(rabi),
            duration.into(),
            phi.into(),
            st.p_ss.into(),
            st.p_mixed.into(),
            st.p_dd.into(),
            amp.into(),
            offset.into(),
            fidelity.into(),
            fock_diff.into(),
            fit_d.into(),
            fit_s.into(),
        ]);
    }
    let summary_line = format!("gate: T = {:.1} µs, {}", duration * 1e6, notes.join("; "));
    Ok(Outcome { tables: vec![summary, traces, traj, fringe], summary: summary_line })
}

fn synth_spec(cfg: &RunConfig) -> Result<NControlledSpec> {
    let s = &cfg.synth;
    let mut spec = match s.n {
        Some(n) => {
            let (Some(nu), Some(dnu), Some(eta)) = (s.nu_com_hz, s.delta_nu_hz, s.eta) else {
                return Err(Error::Config("synth.n needs nu_com_hz, delta_nu_hz and eta as well".into()));
            };
            NControlledSpec::new(n, hz_to_angular(nu), hz_to_angular(dnu), eta, s.target_angle_rad)
        }
        None => {
            let chain = cfg.chain.to_chain()?;
            let mut spec =
                NControlledSpec::from_chain(&chain, cfg.chain.gate_mode, s.target_angle_rad, s.exact_eta)?;
            if let Some(nu) = s.nu_com_hz {
                spec.nu_com = hz_to_angular(nu);
            }
            if let Some(dnu) = s.delta_nu_hz {
                spec.delta_nu = hz_to_angular(dnu);
            }
            if let Some(eta) = s.eta {
                spec.eta = eta;
                spec.eta_per_config = None;
            }
            spec
        }
    };
    if let Some(offsets) = &s.tone_offsets_hz {
        spec.tone_grid = Some(offsets.iter().map(|&o| spec.nu_com + hz_to_angular(o)).collect());
    }
    if let Some(m) = s.max_total_rabi_hz {
        spec.max_total_rabi = hz_to_angular(m);
    }
    Ok(spec)
}

pub fn synth(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.synth;
    let spec = synth_spec(cfg)?;
    let opts = SolveOptions {
        tolerances: Tolerances { closure: s.closure_tol, phase: s.phase_tol },
        starts: s.starts.max(1),
        seed: cfg.seed,
    };
    let r = n_controlled_ms(&spec, &opts)?;
    let sol = &r.solution;
    let report = verify_solution_with(sol, &r.problem, s.trajectory_samples.max(2))?;
    let closure_rel = report.max_closure / report.closure_scale.max(f64::MIN_POSITIVE);
    if closure_rel > s.closure_tol || report.max_phase_error > s.phase_tol {
        return Err(Error::numeric(
            format!("verification failed: closure {closure_rel:.3e} (relative), phase {:.3e} rad", report.max_phase_error),
            closure_rel.max(report.max_phase_error),
        ));
    }

    let mut summary = Table::new(
        None,
        &[
            "n", "duration_s", "tones", "total_rabi_hz", "rabi_sum_hz", "rabi_max_hz", "null_space_dim",
            "closure_rel", "phase_error_rad",
        ],
    );
    summary.push(vec![
        spec.n.into(),
        sol.achieved_duration.into(),
        sol.tones.len().into(),
        hz(sol.total_rabi),
        hz(sol.rabi_sum),
        hz(sol.rabi_max),
        sol.null_space_dim.into(),
        closure_rel.into(),
        report.max_phase_error.into(),
    ]);
    let mut tones = Table::new(Some("tones"), &["tone", "freq_hz", "offset_hz", "rabi_hz", "sign"]);
    for (i, t) in sol.tones.iter().enumerate() {
        tones.push(vec![i.into(), hz(t.detuning), hz(t.detuning - spec.nu_com), hz(t.rabi), t.sign.into()]);
    }
    let mut configs =
        Table::new(Some("configs"), &["config_k", "mode_freq_hz", "eta", "target_rad", "phi_rad", "abs_alpha"]);
    let mut traj = Table::new(Some("trajectory"), &["t_s", "re_alpha", "im_alpha", "phi_rad", "config_k"]);
    for c in &report.configs {
        configs.push(vec![
            c.index.into(),
            hz(c.mode_freq),
            c.eta.into(),
            c.target.into(),
            c.phi_final.into(),
            c.alpha_final.norm().into(),
        ]);
        for i in 0..c.times.len() {
            traj.push(vec![c.times[i].into(), c.alpha[i].re.into(), c.alpha[i].im.into(), c.phi[i].into(), c.index.into()]);
        }
    }
    let summary_line = format!(
        "synth: n = {}, T = {:.1} µs, {} tones, √ΣΩ² = 2π·{:.2} kHz, phase error {:.2e} rad",
        spec.n,
        sol.achieved_duration * 1e6,
        sol.tones.len(),
        angular_to_hz(sol.total_rabi) / 1e3,
        report.max_phase_error
    );
    Ok(Outcome { tables: vec![summary, tones, configs, traj], summary: summary_line })
}

fn target_name(t: NoiseTarget) -> &'static str {
    match t {
        NoiseTarget::DriveIntensity => "drive_intensity",
        NoiseTarget::TrapFreq => "trap_freq",
        NoiseTarget::TweezerIntensity => "tweezer_intensity",
    }
}

const STATS_COLUMNS: [&str; 9] = ["mean", "std", "std_err", "p05", "p50", "p95", "min", "max", "trials"];

fn stats_cells(s: &crate::noise::FidelityStats) -> Vec<Cell> {
    vec![
        s.mean.into(),
        s.std.into(),
        s.std_err.into(),
        s.p05.into(),
        s.p50.into(),
        s.p95.into(),
        s.min.into(),
        s.max.into(),
        s.trials.into(),
    ]
}

pub fn noise(cfg: &RunConfig) -> Result<Outcome> {
    let chain = cfg.chain.to_chain()?;
    let setup = gate_setup(&chain, cfg.chain.gate_mode)?;
    let (delta0, rabi, duration) = nominal_drive(cfg, setup.eta[0])?;
    let n = &cfg.noise;
    let case = parse_case(&n.case)?;
    let mut params = GateNoiseParams::ideal(
        chain.axial_freq,
        setup.freq_d,
        setup.freq_s - setup.freq_d,
        setup.eta[0].abs(),
        delta0,
        case,
    );
    params.rabi = rabi;
    params.duration = duration;
    params.nbar = cfg.gate.nbar;
    let models: Vec<_> = n.models.iter().map(|e| e.to_model()).collect();

    let mut cols = vec!["scenario"];
    cols.extend(STATS_COLUMNS);
    let mut summary = Table::new(None, &cols);
    let nominal = gate_fidelity_mc(&params, &models, n.trials, cfg.seed)?;
    summary.push([vec![Cell::from("nominal")], stats_cells(&nominal)].concat());
    let ideal = gate_fidelity_mc(&params, &[], n.trials, cfg.seed)?;
    summary.push([vec![Cell::from("noiseless")], stats_cells(&ideal)].concat());

    let mut sweep = Table::new(Some("sweep"), &["channel", "multiplier", "amplitude", "mean", "std_err"]);
    for (i, m) in n.models.iter().enumerate() {
        for &mult in &n.sweep {
            let mut scaled = models.clone();
            scaled[i].amplitude *= mult;
            let st = gate_fidelity_mc(&params, &scaled, n.trials, cfg.seed)?;
            sweep.push(vec![
                target_name(m.target).into(),
                mult.into(),
                (m.amplitude * mult).into(),
                st.mean.into(),
                st.std_err.into(),
            ]);
        }
    }

    let mut tables = vec![summary, sweep];
    if let Some(dd) = &n.dd_model {
        let model = dd.to_model();
        let mut t = Table::new(Some("dd"), &["n_stages", "coherence", "std_err", "trials"]);
        for &stages in &n.dd_stages {
            let sched = if stages == 0 { None } else { Some(dd_schedule(duration, stages)?) };
            let r = control_coherence(&model, sched.as_ref(), duration, chain.light_shift, n.dd_trials, cfg.seed)?;
            t.push(vec![stages.into(), r.coherence.into(), r.std_err.into(), r.trials.into()]);
        }
        tables.push(t);
    }
    if n.per_shot {
        let mut t = Table::new(Some("shots"), &["trial", "fidelity"]);
        for (i, f) in nominal.per_shot.iter().enumerate() {
            t.push(vec![i.into(), (*f).into()]);
        }
        tables.push(t);
    }
    let summary_line = format!(
        "noise: case {}, {} shots, mean fidelity {:.4} ± {:.4}",
        case_name(case),
        nominal.trials,
        nominal.mean,
        nominal.std_err
    );
    Ok(Outcome { tables, summary: summary_line })
}

pub fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let sc = &cfg.scan;
    if sc.light_shift_points < 1 {
        return Err(Error::Config("scan.light_shift_points must be at least 1".into()));
    }
    let base = cfg.chain.to_chain()?;
    if base.tweezed_indices().is_empty() {
        return Err(Error::Config("scan needs at least one tweezed ion".into()));
    }
    if let Some(&m) = sc.modes.iter().find(|&&m| m >= base.n_ions) {
        return Err(Error::Config(format!("scan mode {m} out of range")));
    }
    let bare = bare_spectrum(&base)?;
    let mut t = Table::new(None, &["beam_waist_um", "light_shift_hz", "mode", "freq_hz", "shift_hz"]);
    let mut max_shift = 0.0_f64;
    for &w in &sc.beam_waists_um {
        for i in 0..sc.light_shift_points {
            let ls = if sc.light_shift_points == 1 {
                sc.light_shift_start_hz
            } else {
                sc.light_shift_start_hz
                    + (sc.light_shift_stop_hz - sc.light_shift_start_hz) * i as f64 / (sc.light_shift_points - 1) as f64
            };
            let chain = base.clone().with_light_shift(hz_to_angular(ls)).with_beam_waist(w * 1e-6);
            let spec = mode_spectrum(&chain)?;
            for &m in &sc.modes {
                let shift = spec.frequencies[m] - bare.frequencies[m];
                max_shift = max_shift.max(shift);
                t.push(vec![w.into(), ls.into(), m.into(), hz(spec.frequencies[m]), hz(shift)]);
            }
        }
    }
    let summary_line = format!(
        "scan: {} waists × {} light shifts, largest mode shift {:.2} kHz",
        sc.beam_waists_um.len(),
        sc.light_shift_points,
        angular_to_hz(max_shift) / 1e3
    );
    Ok(Outcome { tables: vec![t], summary: summary_line })
}
