//! Coherence of the tweezed control qubit under light-shift noise, with and
//! without the echo schedule that flips the control between drive stages.

use tweezer_gates::constants::hz_to_angular;
use tweezer_gates::noise::{control_coherence, dd_schedule, NoiseModel, NoiseTarget};

fn main() -> tweezer_gates::Result<()> {
    let light_shift = hz_to_angular(10.4e6);
    let gate_time = 500e-6;
    let models = [
        ("static", NoiseModel::quasi_static(NoiseTarget::TweezerIntensity, 1e-3)),
        ("OU τc = 100 ms", NoiseModel::ornstein_uhlenbeck(NoiseTarget::TweezerIntensity, 1e-3, 0.1)),
        ("1/f", NoiseModel::one_over_f(NoiseTarget::TweezerIntensity, 1e-3, 0.1)),
    ];
    for (name, model) in models {
        let bare = control_coherence(&model, None, gate_time, light_shift, 2000, 1)?;
        print!("{name:<15} no DD W = {:.3}", bare.coherence);
        for n in [1, 2, 4, 8, 16] {
            let s = dd_schedule(gate_time, n)?;
            let w = control_coherence(&model, Some(&s), gate_time, light_shift, 2000, 1)?;
            print!("  N={n}: {:.3}", w.coherence);
        }
        println!();
    }
    Ok(())
}
