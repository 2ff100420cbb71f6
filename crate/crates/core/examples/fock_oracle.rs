//! Cross-check of the closed-form populations against direct integration in
//! a truncated Fock space, for a ground-state and a thermal mode.

use std::f64::consts::PI;

use tweezer_gates::constants::hz_to_angular;
use tweezer_gates::ms::{fock_oracle, ms_populations, uniform_grid, ControlState, DriveSpec, FockOptions, GateContext};

fn main() -> tweezer_gates::Result<()> {
    let nu = hz_to_angular(866.995e3);
    let eta = 0.0419;
    let delta0 = hz_to_angular(4e3);
    let duration = 4.0 * PI / delta0;
    let drive = DriveSpec::single_tone(nu, delta0, delta0 / (2.0 * eta), duration);
    let grid = uniform_grid(duration, 101);

    for (nbar, delta) in [(0.0, delta0), (0.0, 2.0 * delta0), (0.5, 2.0 * delta0)] {
        let ctx = GateContext::new(nu + delta - delta0, eta, nbar, ControlState::D);
        let closed = ms_populations(&ctx, &drive, &grid)?;
        let fock = fock_oracle(&ctx, &drive, 30, &grid, &FockOptions::default())?;
        println!(
            "n̄ = {nbar}, δ = {:.1}·δ₀: max |Δp| = {:.2e} (cutoff {}, converged {})",
            delta / delta0,
            fock.trace.max_abs_diff(&closed),
            fock.cutoff,
            fock.converged
        );
    }

    // Counter-rotating sideband terms perturb the result at the 1e-3 level.
    let ctx = GateContext::new(nu + delta0, eta, 0.0, ControlState::S);
    let rwa = fock_oracle(&ctx, &drive, 30, &grid, &FockOptions::default())?;
    let full = fock_oracle(&ctx, &drive, 30, &grid, &FockOptions { counter_rotating: true, ..FockOptions::default() })?;
    println!("counter-rotating terms change populations by up to {:.2e}", full.trace.max_abs_diff(&rwa.trace));
    Ok(())
}
