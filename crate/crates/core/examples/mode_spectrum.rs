//! Axial modes of a three-ion chain, bare and with the centre ion tweezed.
//!
//! Run with `cargo run --example mode_spectrum`.

use tweezer_gates::chain::{bare_spectrum, conditional_spectrum, mode_spectrum, ChainConfig};
use tweezer_gates::constants::{angular_to_hz, hz_to_angular};

fn main() -> tweezer_gates::Result<()> {
    let chain = ChainConfig::new(3, hz_to_angular(360e3))
        .with_tweezed(&[1])
        .with_light_shift(hz_to_angular(10.4e6))
        .with_beam_waist(1e-6);

    let bare = bare_spectrum(&chain)?;
    let tweezed = mode_spectrum(&chain)?;
    println!("mode  λ (bare)   bare (kHz)  tweezed (kHz)  shift (Hz)");
    for m in 0..bare.n_modes() {
        println!(
            "{m:>4}  {:>9.6}  {:>10.3}  {:>13.3}  {:>10.2}",
            bare.eigenvalues[m],
            angular_to_hz(bare.frequencies[m]) / 1e3,
            angular_to_hz(tweezed.frequencies[m]) / 1e3,
            angular_to_hz(tweezed.frequencies[m] - bare.frequencies[m]),
        );
    }

    println!("\nLamb-Dicke parameters η(mode, ion), bare chain:");
    for m in 0..bare.n_modes() {
        let row: Vec<String> = (0..3).map(|i| format!("{:+.5}", bare.lamb_dicke[(m, i)])).collect();
        println!("  mode {m}: {}", row.join("  "));
    }

    let cond = conditional_spectrum(&chain, 2)?;
    println!("\nthird mode vs number of tweezed ions in the potential-feeling state:");
    for &(k, f) in &cond.conditional_freqs {
        println!("  k = {k}: {:.3} kHz", angular_to_hz(f) / 1e3);
    }
    Ok(())
}
