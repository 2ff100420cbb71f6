use rand::Rng;
use rand_distr::StandardNormal;

use super::{NoiseKind, NoiseModel};

/// OU components summed for 1/f noise.
pub const NOISE_COMPONENTS_1F: usize = 20;
/// Decades between the shortest and longest 1/f correlation time.
const DECADES_1F: f64 = 4.0;

/// Exact OU update over `dt`, unit stationary variance.
fn ou_step<R: Rng>(x: f64, dt: f64, tau: f64, rng: &mut R) -> f64 {
    let a = (-dt / tau).exp();
    let xi: f64 = rng.sample(StandardNormal);
    x * a + (1.0 - a * a).sqrt() * xi
}

/// Samples the noise value at the uniform times `k·dt`, k = 0..=steps,
/// starting from the stationary distribution.
pub fn sample_path<R: Rng>(model: &NoiseModel, dt: f64, steps: usize, rng: &mut R) -> Vec<f64> {
    let sigma = model.amplitude;
    match model.kind {
        NoiseKind::QuasiStaticGaussian => {
            let x: f64 = rng.sample(StandardNormal);
            vec![sigma * x; steps + 1]
        }
        NoiseKind::OrnsteinUhlenbeck => {
            let mut x: f64 = rng.sample(StandardNormal);
            let mut out = Vec::with_capacity(steps + 1);
            out.push(sigma * x);
            for _ in 0..steps {
                x = ou_step(x, dt, model.correlation_time, rng);
                out.push(sigma * x);
            }
            out
        }
        NoiseKind::OneOverF => {
            let n = NOISE_COMPONENTS_1F;
            let taus: Vec<f64> = (0..n)
                .map(|j| model.correlation_time * 10f64.powf(-DECADES_1F * j as f64 / (n - 1) as f64))
                .collect();
            let weight = sigma / (n as f64).sqrt();
            let mut xs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let mut out = Vec::with_capacity(steps + 1);
            out.push(weight * xs.iter().sum::<f64>());
            for _ in 0..steps {
                for (x, &tau) in xs.iter_mut().zip(&taus) {
                    *x = ou_step(*x, dt, tau, rng);
                }
                out.push(weight * xs.iter().sum::<f64>());
            }
            out
        }
    }
}
