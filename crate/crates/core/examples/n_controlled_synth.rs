//! Multi-tone synthesis of an n-controlled MS gate and its independent
//! quadrature verification.
//!
//! `cargo run --release --example n_controlled_synth -- 10` solves the
//! ten-control instance; the default is n = 3.

use std::f64::consts::FRAC_PI_2;

use tweezer_gates::constants::{angular_to_hz, hz_to_angular};
use tweezer_gates::synth::{n_controlled_ms, verify_solution, NControlledSpec, SolveOptions};

fn main() -> tweezer_gates::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let spec = NControlledSpec::new(n, hz_to_angular(210.7e3), hz_to_angular(4e3), 0.061, FRAC_PI_2);
    let r = n_controlled_ms(&spec, &SolveOptions::default())?;
    let sol = &r.solution;

    println!("{}", r.circuit.summary);
    println!(
        "T = {:.1} µs, {} tones, √ΣΩ² = 2π·{:.2} kHz, ΣΩ = 2π·{:.2} kHz, max Ω = 2π·{:.2} kHz",
        sol.achieved_duration * 1e6,
        sol.tones.len(),
        angular_to_hz(sol.total_rabi) / 1e3,
        angular_to_hz(sol.rabi_sum) / 1e3,
        angular_to_hz(sol.rabi_max) / 1e3
    );
    for t in sol.tones.iter().filter(|t| t.rabi > 1e-6 * sol.rabi_max) {
        println!(
            "  tone at ν_COM {:+9.2} Hz: Ω = 2π·{:8.2} Hz, sign {:+}",
            angular_to_hz(t.detuning - spec.nu_com),
            angular_to_hz(t.rabi),
            t.sign
        );
    }

    let v = verify_solution(sol, &r.problem)?;
    println!("\nk   Φ_k (rad)      |α_k(T)|");
    for c in &v.configs {
        println!("{:<3} {:+.8}  {:.2e}", c.index, c.phi_final, c.alpha_final.norm());
    }
    println!(
        "closure {:.2e} of scale, phase error {:.2e} rad",
        v.max_closure / v.closure_scale,
        v.max_phase_error
    );
    Ok(())
}
