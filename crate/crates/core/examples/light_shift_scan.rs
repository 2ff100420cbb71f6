//! Shift of the COM and third mode against light shift and beam waist,
//! printed as columns ready for plotting.

use tweezer_gates::chain::{bare_spectrum, mode_spectrum, ChainConfig};
use tweezer_gates::constants::{angular_to_hz, hz_to_angular};

fn main() -> tweezer_gates::Result<()> {
    let base = ChainConfig::new(3, hz_to_angular(360e3)).with_tweezed(&[1]);
    let bare = bare_spectrum(&base)?;
    println!("waist_um  light_shift_MHz  com_shift_kHz  third_shift_kHz");
    for waist in [0.8, 1.0, 1.5] {
        for step in 0..=5 {
            let ls = 5e6 * step as f64;
            let chain = base.clone().with_light_shift(hz_to_angular(ls)).with_beam_waist(waist * 1e-6);
            let f = mode_spectrum(&chain)?.frequencies;
            println!(
                "{waist:8.1}  {:15.1}  {:13.3}  {:15.3}",
                ls / 1e6,
                angular_to_hz(f[0] - bare.frequencies[0]) / 1e3,
                angular_to_hz(f[2] - bare.frequencies[2]) / 1e3
            );
        }
    }
    Ok(())
}
