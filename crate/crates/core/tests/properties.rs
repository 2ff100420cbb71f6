mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use tweezer_gates::chain::{bare_spectrum, mode_spectrum, ChainConfig};
use tweezer_gates::constants::hz_to_angular;
use tweezer_gates::ms::{
    entanglement_phase, final_state, parity_scan, state_fidelity, ControlState, DriveSpec, GateContext, Tone,
};
use tweezer_gates::noise::{control_coherence, dd_schedule, NoiseModel, NoiseTarget};
use tweezer_gates::synth::{
    commensurate_duration, commensurate_tone_grid, effective_modes, solve_amplitudes, verify_solution, SolveOptions,
    SynthProblem,
};

fn problem(n: usize, m: usize, nu: f64, dnu: f64, eta: f64, angle: f64) -> SynthProblem {
    let mut targets = vec![0.0; n + 1];
    targets[n] = angle;
    SynthProblem {
        effective_modes: effective_modes(nu, dnu, n),
        eta_per_mode: vec![eta; n + 1],
        target_phases: targets,
        duration: commensurate_duration(dnu, m),
        tone_detunings: commensurate_tone_grid(nu, dnu, n, m),
        max_total_rabi: f64::INFINITY,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn synthesis_is_verified_optimal_and_scales(
        n in 1usize..=3,
        m in 2usize..=4,
        nu_khz in 200.0..900.0f64,
        dnu_khz in 2.0..8.0f64,
        eta in 0.02..0.1f64,
        angle in 0.1..PI,
    ) {
        let (nu, dnu) = (hz_to_angular(nu_khz * 1e3), hz_to_angular(dnu_khz * 1e3));
        let p = problem(n, m, nu, dnu, eta, angle);
        let s = solve_amplitudes(&p, &SolveOptions::default()).unwrap();
        let v = verify_solution(&s, &p).unwrap();
        prop_assert!(v.max_closure <= 1e-6 * v.closure_scale);
        prop_assert!(v.max_phase_error <= 1e-4);

        let coef = common::lp_coefficients(&p.effective_modes, &p.eta_per_mode, &p.tone_detunings, p.duration);
        let x = common::lp_min_power(&coef, &p.target_phases).expect("LP feasible");
        let lp_power: f64 = x.iter().sum();
        let power = s.total_rabi * s.total_rabi;
        prop_assert!((power - lp_power).abs() <= 1e-4 * lp_power, "solver {} vs LP {}", power, lp_power);

        // Φ is quadratic in Ω: doubling the target scales Ω by √2; η scales Ω by 1/η.
        let p2 = problem(n, m, nu, dnu, eta, 2.0 * angle);
        let s2 = solve_amplitudes(&p2, &SolveOptions::default()).unwrap();
        prop_assert!((s2.total_rabi / s.total_rabi - 2f64.sqrt()).abs() <= 1e-4);
        let p3 = problem(n, m, nu, dnu, 2.0 * eta, angle);
        let s3 = solve_amplitudes(&p3, &SolveOptions::default()).unwrap();
        prop_assert!((s3.total_rabi / s.total_rabi - 0.5).abs() <= 1e-4);

        let (closure, phase) = s.check_against_dynamics(&p).unwrap();
        prop_assert!(closure <= 1e-6 * v.closure_scale && phase <= 1e-4);
    }
}

proptest! {
    #[test]
    fn bare_chain_has_com_and_breathing_modes(n in 2usize..=12, f_khz in 100.0..2000.0f64) {
        let s = bare_spectrum(&ChainConfig::new(n, hz_to_angular(f_khz * 1e3))).unwrap();
        prop_assert!((s.eigenvalues[0] - 1.0).abs() < 1e-8);
        prop_assert!((s.eigenvalues[1] - 3.0).abs() < 1e-8);
        let b = &s.mode_matrix;
        let gram = b * b.transpose();
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[(i, j)] - id).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tweezers_only_raise_mode_frequencies(
        n in 2usize..=8,
        ion in 0usize..8,
        ls_mhz in 0.0..30.0f64,
        waist in 0.7..2.0f64,
    ) {
        let chain = ChainConfig::new(n, hz_to_angular(300e3))
            .with_tweezed(&[ion % n])
            .with_light_shift(hz_to_angular(ls_mhz * 1e6))
            .with_beam_waist(waist * 1e-6);
        let t = mode_spectrum(&chain).unwrap().frequencies;
        let b = bare_spectrum(&chain).unwrap().frequencies;
        for (x, y) in t.iter().zip(&b) {
            prop_assert!(x - y >= -1e-6 * y);
        }
    }

    #[test]
    fn closed_form_phase_matches_quadrature(
        tones in prop::collection::vec((-20.0..20.0f64, 1.0..50.0f64), 1..4),
        t_us in 50.0..600.0f64,
    ) {
        let nu = hz_to_angular(500e3);
        let eta = 0.05;
        let drive = DriveSpec {
            tones: tones
                .iter()
                .map(|&(d_khz, r_khz)| Tone { detuning: nu - hz_to_angular(d_khz * 1e3 + 100.0), rabi: hz_to_angular(r_khz * 1e3), phase: 0.0 })
                .collect(),
            duration: t_us * 1e-6,
        };
        let closed = entanglement_phase(&drive, nu, eta).unwrap();
        let oracle_tones: Vec<_> = drive.tones.iter().map(|t| (nu - t.detuning, t.rabi)).collect();
        let oracle = common::phase(&oracle_tones, eta, drive.duration);
        prop_assert!((closed - oracle).abs() <= 1e-7 * closed.abs().max(1.0), "{} vs {}", closed, oracle);
    }

    #[test]
    fn case_s_parity_is_sensitive_case_d_is_flat(eta in 0.02..0.1f64, d0_khz in 1.0..10.0f64, mismatch in 0.02..0.3f64) {
        let nu = hz_to_angular(800e3);
        let d0 = hz_to_angular(d0_khz * 1e3);
        let drive = DriveSpec::single_tone(nu, d0, d0 / (2.0 * eta), 4.0 * PI / d0);
        let phases: Vec<f64> = (0..24).map(|i| PI * i as f64 / 24.0).collect();
        let fid = |case, shift: f64| {
            let st = final_state(&GateContext::new(nu + shift, eta, 0.0, case), &drive).unwrap();
            let scan = parity_scan(&st, &phases).unwrap();
            (scan.amplitude, state_fidelity(st.p_ss.clamp(0.0, 1.0), st.p_dd.clamp(0.0, 1.0), scan.amplitude.min(1.0), case).unwrap())
        };
        let (a_d, f_d) = fid(ControlState::D, 0.0);
        prop_assert!(a_d < 1e-9 && (f_d - 1.0).abs() < 1e-9);
        let (a_s, f_s) = fid(ControlState::S, d0);
        prop_assert!((a_s - 1.0).abs() < 1e-9 && (f_s - 1.0).abs() < 1e-9);
        let (a_off, f_off) = fid(ControlState::S, d0 * (1.0 + mismatch));
        prop_assert!(a_off < a_s && f_off < f_s);
    }

    #[test]
    fn static_light_shift_is_refocused(n in 1usize..=16, amp in 1e-4..0.1f64) {
        let model = NoiseModel::quasi_static(NoiseTarget::TweezerIntensity, amp);
        let s = dd_schedule(500e-6, n).unwrap();
        let w = control_coherence(&model, Some(&s), 500e-6, hz_to_angular(10e6), 100, 9).unwrap();
        prop_assert!((w.coherence - 1.0).abs() < 1e-12);
    }
}
