//! Monte-Carlo fidelity of the D-case gate under drive-intensity and trap
//! frequency noise, with a sweep over each channel.

use tweezer_gates::constants::hz_to_angular;
use tweezer_gates::ms::ControlState;
use tweezer_gates::noise::{gate_fidelity_mc, GateNoiseParams, NoiseModel, NoiseTarget};

fn main() -> tweezer_gates::Result<()> {
    let params = GateNoiseParams::ideal(
        hz_to_angular(360e3),
        hz_to_angular(866.995e3),
        hz_to_angular(4.06e3),
        0.0419,
        hz_to_angular(4e3),
        ControlState::D,
    );
    let drive = NoiseModel::quasi_static(NoiseTarget::DriveIntensity, 0.03);
    let trap = NoiseModel::quasi_static(NoiseTarget::TrapFreq, hz_to_angular(100.0));

    let s = gate_fidelity_mc(&params, &[drive, trap], 10_000, 7)?;
    println!(
        "3% drive + 100 Hz trap: F = {:.4} ± {:.4} (5–95%: {:.4}–{:.4})",
        s.mean, s.std_err, s.p05, s.p95
    );

    for scale in [0.5, 1.0, 2.0] {
        let d = gate_fidelity_mc(&params, &[NoiseModel { amplitude: 0.03 * scale, ..drive }], 4000, 7)?;
        let t = gate_fidelity_mc(&params, &[NoiseModel { amplitude: trap.amplitude * scale, ..trap }], 4000, 7)?;
        println!("×{scale:<3}  drive only F = {:.4}   trap only F = {:.4}", d.mean, t.mean);
    }
    Ok(())
}
