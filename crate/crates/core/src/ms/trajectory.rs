use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_grid, DriveSpec, TrajectoryResult};
use crate::error::Result;
use crate::integrals::{double_exp_integral, exp_integral};

/// α(t) and Φ(t) of one mode under `drive`, in the rotating-wave picture.
pub fn displacement_trajectory(
    drive: &DriveSpec,
    mode_freq: f64,
    eta: f64,
    t_grid: &[f64],
) -> Result<TrajectoryResult> {
    drive.validate()?;
    check_grid(t_grid)?;
    let alpha = t_grid.iter().map(|&t| alpha_at(drive, mode_freq, eta, t)).collect();
    let phi = t_grid.iter().map(|&t| phase_at(drive, mode_freq, eta, t)).collect();
    Ok(TrajectoryResult { times: t_grid.to_vec(), alpha, phi })
}

/// Φ(T) at the end of the drive.
pub fn entanglement_phase(drive: &DriveSpec, mode_freq: f64, eta: f64) -> Result<f64> {
    drive.validate()?;
    Ok(phase_at(drive, mode_freq, eta, drive.duration))
}

pub(crate) fn alpha_at(drive: &DriveSpec, mode_freq: f64, eta: f64, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for tone in &drive.tones {
        let delta = mode_freq - tone.detuning;
        acc += Complex64::from_polar(tone.rabi, tone.phase) * exp_integral(delta, t);
    }
    acc * (0.5 * eta)
}

pub(crate) fn phase_at(drive: &DriveSpec, mode_freq: f64, eta: f64, t: f64) -> f64 {
    let tones = &drive.tones;
    let mut acc = 0.0;
    for (i, a) in tones.iter().enumerate() {
        let di = mode_freq - a.detuning;
        for b in &tones[i..] {
            let dj = mode_freq - b.detuning;
            let w = a.rabi * b.rabi;
            if w == 0.0 {
                continue;
            }
            let kij = Complex64::from_polar(1.0, a.phase - b.phase) * double_exp_integral(di, -dj, t);
            if std::ptr::eq(a, b) {
                acc += w * kij.im;
            } else {
                let kji =
                    Complex64::from_polar(1.0, b.phase - a.phase) * double_exp_integral(dj, -di, t);
                acc += w * (kij.im + kji.im);
            }
        }
    }
    eta * eta * acc
}

/// Symmetric matrix Q with `Φ(t) = Σ_ij Ω_i Ω_j Q_ij` for tones at the given
/// carrier detunings and zero force phase.
pub fn phase_matrix(tone_detunings: &[f64], mode_freq: f64, eta: f64, t: f64) -> DMatrix<f64> {
    let m = tone_detunings.len();
    let mut q = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let di = mode_freq - tone_detunings[i];
        for j in i..m {
            let dj = mode_freq - tone_detunings[j];
            let v = if i == j {
                double_exp_integral(di, -dj, t).im
            } else {
                0.5 * (double_exp_integral(di, -dj, t).im + double_exp_integral(dj, -di, t).im)
            };
            q[(i, j)] = eta * eta * v;
            q[(j, i)] = eta * eta * v;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ms::{uniform_grid, Tone};
    use std::f64::consts::PI;

    #[test]
    fn zero_rabi_gives_zero_trajectory() {
        let d = DriveSpec::single_tone(1e6, 2e4, 0.0, 1e-3);
        let tr = displacement_trajectory(&d, 1e6, 0.05, &uniform_grid(1e-3, 33)).unwrap();
        assert!(tr.alpha.iter().all(|a| a.norm() == 0.0));
        assert!(tr.phi.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn single_tone_closes_and_pins_phase() {
        let (nu, delta, eta, rabi) = (5.4e6, 2.0 * PI * 4e3, 0.042, 3.0e5);
        for loops in 1..=4 {
            let t = 2.0 * PI * loops as f64 / delta;
            let d = DriveSpec::single_tone(nu, delta, rabi, t);
            let a = alpha_at(&d, nu, eta, t);
            assert!(a.norm() <= 1e-12, "loops {loops}: {a}");
            let phi = entanglement_phase(&d, nu, eta).unwrap();
            let expect = eta * eta * rabi * rabi * t / delta;
            assert!((phi - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn resonant_tone_grows_linearly() {
        let d = DriveSpec::single_tone(1e6, 0.0, 2.0, 1.0);
        let a = alpha_at(&d, 1e6, 0.1, 0.5);
        assert!((a - Complex64::new(0.05, 0.0)).norm() < 1e-15);
        assert_eq!(phase_at(&d, 1e6, 0.1, 0.5), 0.0);
    }

    #[test]
    fn phase_matrix_reproduces_phase() {
        let nu = 2.0 * PI * 200e3;
        let tones = [nu - 2.0 * PI * 3e3, nu + 2.0 * PI * 5e3, nu - 2.0 * PI * 11e3];
        let rabis = [1.0e5, -0.4e5, 0.7e5];
        let t = 0.6e-3;
        let q = phase_matrix(&tones, nu, 0.05, t);
        let quad: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| rabis[i] * rabis[j] * q[(i, j)]).sum();
        let drive = DriveSpec {
            tones: tones
                .iter()
                .zip(rabis)
                .map(|(&mu, r)| Tone { detuning: mu, rabi: r.abs(), phase: if r < 0.0 { PI } else { 0.0 } })
                .collect(),
            duration: t,
        };
        let direct = phase_at(&drive, nu, 0.05, t);
        assert!((quad - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn grid_must_start_at_zero() {
        let d = DriveSpec::single_tone(1e6, 2e4, 1.0, 1e-3);
        assert!(displacement_trajectory(&d, 1e6, 0.05, &[0.1, 0.2]).is_err());
        assert!(displacement_trajectory(&d, 1e6, 0.05, &[0.0, 0.2, 0.1]).is_err());
    }
}
