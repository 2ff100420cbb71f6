//! Parity fringe of the entangled state, its fitted contrast, and the state
//! fidelities of both control cases. Also shows a detuning fit on the
//! simulated population trace.

use std::f64::consts::PI;

use tweezer_gates::constants::{angular_to_hz, hz_to_angular};
use tweezer_gates::ms::{
    cms_unitary, final_state, fit_detuning, ms_populations, parity_scan, state_fidelity, uniform_grid, ControlState,
    DriveSpec, FitModel, GateContext,
};

fn main() -> tweezer_gates::Result<()> {
    let nu = hz_to_angular(866.995e3);
    let eta = 0.0419;
    let delta0 = hz_to_angular(4e3);
    let (rabi, duration) = (delta0 / (2.0 * eta), 4.0 * PI / delta0);
    let drive = DriveSpec::single_tone(nu, delta0, rabi, duration);

    // Slightly off the ideal shift so the fringe contrast is below one.
    for (case, shift) in [(ControlState::D, 0.0), (ControlState::S, hz_to_angular(4.2e3))] {
        let ctx = GateContext::new(nu + shift, eta, 0.0, case);
        let st = final_state(&ctx, &drive)?;
        let phases: Vec<f64> = (0..32).map(|i| PI * i as f64 / 32.0).collect();
        let scan = parity_scan(&st, &phases)?;
        let f = state_fidelity(st.p_ss, st.p_dd, scan.amplitude, case)?;
        println!(
            "{case:?}: p_SS = {:.4}, p_DD = {:.4}, A_p = {:.4}, φ₀ = {:+.4}, F = {:.4}",
            st.p_ss, st.p_dd, scan.amplitude, scan.phase_offset, f
        );

        let trace = ms_populations(&ctx, &drive, &uniform_grid(duration, 64))?;
        let model = FitModel { ctx: ctx.clone(), rabi, duration, fit_rabi: true };
        let fit = fit_detuning(&trace, 1.03 * (delta0 + shift), &model)?;
        println!(
            "    fitted δ = 2π·{:.2} Hz (true {:.2}), Ω = 2π·{:.1} Hz",
            angular_to_hz(fit.detuning),
            angular_to_hz(delta0 + shift),
            angular_to_hz(fit.rabi)
        );
    }

    let cms = cms_unitary(PI, PI / 2.0);
    println!("\nconditional gate equals a CMS up to local rotations: {}", cms.equivalent_to_cms());
    Ok(())
}
