//! The conditional MS gate: the same drive gives a full flip with the control
//! in D and a maximally entangling gate with the control in S, because the
//! tweezer moves the gate mode by about δ₀.

use std::f64::consts::PI;

use tweezer_gates::chain::{bare_spectrum, conditional_spectrum, ChainConfig};
use tweezer_gates::constants::{angular_to_hz, hz_to_angular};
use tweezer_gates::ms::{entanglement_phase, ms_populations, uniform_grid, ControlState, DriveSpec, GateContext};

fn main() -> tweezer_gates::Result<()> {
    let chain = ChainConfig::new(3, hz_to_angular(360e3)).with_tweezed(&[1]).with_light_shift(hz_to_angular(10.4e6));
    let eta = bare_spectrum(&chain)?.lamb_dicke[(2, 0)];
    let cond = conditional_spectrum(&chain, 2)?;
    let (nu_d, nu_s) = (cond.freq(0).unwrap(), cond.freq(1).unwrap());

    let delta0 = hz_to_angular(4e3);
    let duration = 4.0 * PI / delta0;
    let rabi = delta0 / (2.0 * eta);
    let drive = DriveSpec::single_tone(nu_d, delta0, rabi, duration);
    println!(
        "η = {eta:.5}, Ω = 2π·{:.2} kHz, T = {:.0} µs, Δν = 2π·{:.1} Hz",
        angular_to_hz(rabi) / 1e3,
        duration * 1e6,
        angular_to_hz(nu_s - nu_d)
    );

    let grid = uniform_grid(duration, 11);
    for (case, nu) in [(ControlState::D, nu_d), (ControlState::S, nu_s)] {
        let ctx = GateContext::new(nu, eta, 0.0, case);
        let trace = ms_populations(&ctx, &drive, &grid)?;
        println!("\ncontrol {case:?}: Φ(T) = {:.6} rad", entanglement_phase(&drive, nu, eta)?);
        println!("   t (µs)    p_SS    p_SD+DS    p_DD");
        for i in 0..trace.len() {
            println!(
                "  {:>7.1}  {:.4}   {:.4}    {:.4}",
                trace.times[i] * 1e6,
                trace.p_ss[i],
                trace.p_mixed[i],
                trace.p_dd[i]
            );
        }
    }
    Ok(())
}
