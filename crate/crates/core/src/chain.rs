//! Axial normal modes of a linear ion chain with optical tweezers.
//!
//! Positions are measured in units of the length scale
//! `l = (e²/(4πε₀ m ν²))^(1/3)`. A tweezed ion in the qubit state that feels
//! the optical potential adds `(ω_op/ν)²` to its diagonal secular-matrix
//! element. The tweezer is assumed to leave the equilibrium positions
//! unchanged.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constants::{PhysicalConstants, CA40_MASS, HBAR};
use crate::error::{Error, Result};

/// Newton iteration cap for the equilibrium solve.
const EQUILIBRIUM_MAX_ITER: usize = 200;
/// Infinity-norm of the dimensionless force at convergence.
const EQUILIBRIUM_TOL: f64 = 1e-12;
/// Largest tweezed-ion count for which every subset is evaluated in
/// [`conditional_spectrum`].
const MAX_SUBSET_ENUMERATION: usize = 12;

/// Physical description of a chain. All frequencies are angular (rad/s),
/// lengths in metres and masses in kilograms.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_ions: usize,
    pub ion_mass: f64,
    /// Axial trap frequency ν (the COM frequency of the bare chain).
    pub axial_freq: f64,
    /// `true` for ions illuminated by a tweezer.
    pub tweezer_flags: Vec<bool>,
    /// Light shift ω_LS on each tweezed ion.
    pub light_shift: f64,
    pub beam_waist: f64,
    /// Static qubit-frequency offsets per ion.
    pub qubit_offsets: Vec<f64>,
    pub drive_wavelength: f64,
    /// Projection of the drive wavevector on the trap axis, in [0, 1].
    pub axis_projection: f64,
}

impl ChainConfig {
    /// A ⁴⁰Ca⁺ chain without tweezers, 1 µm waist, 729 nm drive along the axis.
    pub fn new(n_ions: usize, axial_freq: f64) -> Self {
        ChainConfig {
            n_ions,
            ion_mass: CA40_MASS,
            axial_freq,
            tweezer_flags: vec![false; n_ions],
            light_shift: 0.0,
            beam_waist: 1e-6,
            qubit_offsets: vec![0.0; n_ions],
            drive_wavelength: 729e-9,
            axis_projection: 1.0,
        }
    }

    pub fn with_tweezed(mut self, ions: &[usize]) -> Self {
        self.tweezer_flags = vec![false; self.n_ions];
        for &i in ions {
            if i < self.n_ions {
                self.tweezer_flags[i] = true;
            }
        }
        self
    }

    pub fn with_light_shift(mut self, light_shift: f64) -> Self {
        self.light_shift = light_shift;
        self
    }

    pub fn with_beam_waist(mut self, beam_waist: f64) -> Self {
        self.beam_waist = beam_waist;
        self
    }

    pub fn tweezed_indices(&self) -> Vec<usize> {
        self.tweezer_flags
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::domain("chain needs at least one ion"));
        }
        if !(self.axial_freq > 0.0) {
            return Err(Error::domain("axial frequency must be positive"));
        }
        if !(self.ion_mass > 0.0) {
            return Err(Error::domain("ion mass must be positive"));
        }
        if !(self.beam_waist > 0.0) {
            return Err(Error::domain("beam waist must be positive"));
        }
        if !(self.light_shift >= 0.0) {
            return Err(Error::domain("light shift must be non-negative"));
        }
        if self.tweezer_flags.len() != self.n_ions {
            return Err(Error::domain(format!(
                "tweezer flags have length {} for {} ions",
                self.tweezer_flags.len(),
                self.n_ions
            )));
        }
        if self.qubit_offsets.len() != self.n_ions {
            return Err(Error::domain(format!(
                "qubit offsets have length {} for {} ions",
                self.qubit_offsets.len(),
                self.n_ions
            )));
        }
        if !(self.drive_wavelength > 0.0) {
            return Err(Error::domain("drive wavelength must be positive"));
        }
        if !(0.0..=1.0).contains(&self.axis_projection) {
            return Err(Error::domain("axis projection must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Axial modes of a chain, sorted by ascending frequency.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    /// Mode frequencies ν_m, rad/s.
    pub frequencies: Vec<f64>,
    /// Eigenvalues λ_m of the secular matrix (ν_m = ν·√λ_m).
    pub eigenvalues: Vec<f64>,
    /// Row m holds the normalised participation b_{m,i} of each ion.
    pub mode_matrix: DMatrix<f64>,
    /// η_{m,i}, same layout as `mode_matrix`.
    pub lamb_dicke: DMatrix<f64>,
    pub length_scale: f64,
    /// Dimensionless equilibrium positions u_i.
    pub equilibria: Vec<f64>,
}

impl ModeSpectrum {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn mode_vector(&self, mode: usize) -> Vec<f64> {
        self.mode_matrix.row(mode).iter().copied().collect()
    }
}

/// Gate-mode frequency as a function of how many tweezed ions are in the
/// state that feels the optical potential.
#[derive(Debug, Clone)]
pub struct ConditionalSpectrum {
    pub base_mode_index: usize,
    /// `(k, ν(k))` for k = 0..=n_tweezed.
    pub conditional_freqs: Vec<(usize, f64)>,
    /// Average shift per tweezed ion, (ν(n) − ν(0))/n.
    pub per_shift: f64,
    /// Largest relative spread of ν(k) over the choice of which k ions are
    /// tweezed. `None` when the enumeration was skipped for large n.
    pub subset_spread: Option<f64>,
}

impl ConditionalSpectrum {
    pub fn freq(&self, k: usize) -> Option<f64> {
        self.conditional_freqs.get(k).map(|&(_, f)| f)
    }
}

/// Characteristic length `l = (e²/(4πε₀ m ν²))^(1/3)`.
pub fn length_scale(axial_freq: f64, ion_mass: f64) -> Result<f64> {
    if !(axial_freq > 0.0) || !(ion_mass > 0.0) {
        return Err(Error::domain("length scale needs positive frequency and mass"));
    }
    let k = PhysicalConstants::CODATA_2018.coulomb();
    Ok((k / (ion_mass * axial_freq * axial_freq)).cbrt())
}

/// Frequency of the harmonic potential created by a tweezer with light shift
/// `light_shift` and waist `beam_waist`: `2·√(ħ ω_LS / (m w₀²))`.
pub fn optical_confinement(light_shift: f64, beam_waist: f64, ion_mass: f64) -> Result<f64> {
    if light_shift < 0.0 || light_shift.is_nan() {
        return Err(Error::domain("only non-negative (confining) light shifts are modelled"));
    }
    if !(beam_waist > 0.0) || !(ion_mass > 0.0) {
        return Err(Error::domain("beam waist and ion mass must be positive"));
    }
    Ok(2.0 * (HBAR * light_shift / (ion_mass * beam_waist * beam_waist)).sqrt())
}

/// Dimensionless force on each ion, `∂V/∂u_i` of
/// `V = Σ u_i²/2 + Σ_{i<j} 1/|u_i − u_j|`.
pub fn equilibrium_gradient(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut g = u.to_vec();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = u[i] - u[j];
            g[i] -= d.signum() / (d * d);
        }
    }
    g
}

fn coulomb_hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                diag += c;
                h[(i, j)] = -c;
            }
        }
        h[(i, i)] = diag;
    }
    h
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn strictly_increasing(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[1] > w[0])
}

/// Dimensionless equilibrium positions of an `n_ions` chain in a harmonic
/// axial potential, sorted ascending and symmetric about zero.
pub fn equilibrium_positions(n_ions: usize) -> Result<Vec<f64>> {
    if n_ions == 0 {
        return Err(Error::domain("chain needs at least one ion"));
    }
    if n_ions == 1 {
        return Ok(vec![0.0]);
    }
    // uniform guess using the usual central-spacing scaling 2.018·N^-0.559
    let spacing = 2.018 * (n_ions as f64).powf(-0.559);
    let mid = (n_ions as f64 - 1.0) / 2.0;
    let mut u: Vec<f64> = (0..n_ions).map(|i| (i as f64 - mid) * spacing).collect();
    let mut g = equilibrium_gradient(&u);
    let mut gnorm = inf_norm(&g);

    for _ in 0..EQUILIBRIUM_MAX_ITER {
        if gnorm <= EQUILIBRIUM_TOL {
            break;
        }
        let h = coulomb_hessian(&u);
        let rhs = DVector::from_vec(g.clone());
        let step = h
            .cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::numeric("equilibrium Hessian not positive definite", gnorm))?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x - scale * s).collect();
            if strictly_increasing(&trial) {
                let tg = equilibrium_gradient(&trial);
                let tn = inf_norm(&tg);
                if tn < gnorm || tn <= EQUILIBRIUM_TOL {
                    u = trial;
                    g = tg;
                    gnorm = tn;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    // remove rounding asymmetry, then re-check
    let sym: Vec<f64> = (0..n_ions).map(|i| 0.5 * (u[i] - u[n_ions - 1 - i])).collect();
    let sym_norm = inf_norm(&equilibrium_gradient(&sym));
    if sym_norm <= gnorm.max(EQUILIBRIUM_TOL) {
        u = sym;
        gnorm = sym_norm;
    }
    if gnorm > EQUILIBRIUM_TOL {
        return Err(Error::numeric("equilibrium solve did not converge", gnorm));
    }
    Ok(u)
}

/// Axial secular matrix with an optical potential of frequency `omega_op`
/// on every flagged ion.
pub fn secular_matrix(
    u: &[f64],
    tweezer_flags: &[bool],
    omega_op: f64,
    axial_freq: f64,
) -> Result<DMatrix<f64>> {
    let n = u.len();
    if tweezer_flags.len() != n {
        return Err(Error::domain("tweezer flags and positions differ in length"));
    }
    if !(axial_freq > 0.0) {
        return Err(Error::domain("axial frequency must be positive"));
    }
    let ratio2 = (omega_op / axial_freq).powi(2);
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = (u[i] - u[j]).abs();
            if d == 0.0 || !d.is_finite() {
                return Err(Error::domain(format!("ions {i} and {j} coincide")));
            }
            let c = 1.0 / (d * d * d);
            diag += 2.0 * c;
            // fill only the upper triangle and mirror, so A is exactly symmetric
            if j > i {
                a[(i, j)] = -2.0 * c;
                a[(j, i)] = -2.0 * c;
            }
        }
        if tweezer_flags[i] {
            diag += ratio2;
        }
        a[(i, i)] = diag;
    }
    Ok(a)
}

/// Symmetric eigen-decomposition sorted by ascending eigenvalue. Returns the
/// eigenvalues and a matrix whose row m is mode m, with the first non-zero
/// component made positive.
pub fn diagonalize(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let mut values = Vec::with_capacity(n);
    let mut modes = DMatrix::<f64>::zeros(n, n);
    for (row, &col) in order.iter().enumerate() {
        values.push(eig.eigenvalues[col]);
        let v = eig.eigenvectors.column(col);
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-9)
            .map(|x| x.signum())
            .unwrap_or(1.0);
        for i in 0..n {
            modes[(row, i)] = sign * v[i];
        }
    }
    (values, modes)
}

/// η_{m,i} = b_{m,i} · k · cosθ · √(ħ / (2 m ν_m)) with k = 2π/λ.
pub fn lamb_dicke(
    spectrum: &ModeSpectrum,
    drive_wavelength: f64,
    axis_projection: f64,
    ion_mass: f64,
) -> Result<DMatrix<f64>> {
    lamb_dicke_from(
        &spectrum.frequencies,
        &spectrum.mode_matrix,
        drive_wavelength,
        axis_projection,
        ion_mass,
    )
}

fn lamb_dicke_from(
    frequencies: &[f64],
    modes: &DMatrix<f64>,
    drive_wavelength: f64,
    axis_projection: f64,
    ion_mass: f64,
) -> Result<DMatrix<f64>> {
    if !(drive_wavelength > 0.0) {
        return Err(Error::domain("drive wavelength must be positive"));
    }
    if !(0.0..=1.0).contains(&axis_projection) {
        return Err(Error::domain("axis projection must lie in [0, 1]"));
    }
    if !(ion_mass > 0.0) {
        return Err(Error::domain("ion mass must be positive"));
    }
    let k = 2.0 * std::f64::consts::PI / drive_wavelength * axis_projection;
    let mut eta = modes.clone();
    for (m, &nu) in frequencies.iter().enumerate() {
        let x0 = (HBAR / (2.0 * ion_mass * nu)).sqrt();
        for i in 0..modes.ncols() {
            eta[(m, i)] = modes[(m, i)] * k * x0;
        }
    }
    Ok(eta)
}

fn spectrum_from(
    config: &ChainConfig,
    u: &[f64],
    flags: &[bool],
    omega_op: f64,
    length: f64,
) -> Result<ModeSpectrum> {
    let a = secular_matrix(u, flags, omega_op, config.axial_freq)?;
    let (eigenvalues, mode_matrix) = diagonalize(&a);
    if let Some(&bad) = eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::numeric("non-positive secular eigenvalue (unstable chain)", bad));
    }
    let frequencies: Vec<f64> = eigenvalues.iter().map(|l| config.axial_freq * l.sqrt()).collect();
    let lamb_dicke = lamb_dicke_from(
        &frequencies,
        &mode_matrix,
        config.drive_wavelength,
        config.axis_projection,
        config.ion_mass,
    )?;
    Ok(ModeSpectrum {
        frequencies,
        eigenvalues,
        mode_matrix,
        lamb_dicke,
        length_scale: length,
        equilibria: u.to_vec(),
    })
}

/// Axial mode spectrum with every flagged ion feeling the optical potential.
pub fn mode_spectrum(config: &ChainConfig) -> Result<ModeSpectrum> {
    config.validate()?;
    let u = equilibrium_positions(config.n_ions)?;
    let length = length_scale(config.axial_freq, config.ion_mass)?;
    let omega_op = optical_confinement(config.light_shift, config.beam_waist, config.ion_mass)?;
    spectrum_from(config, &u, &config.tweezer_flags, omega_op, length)
}

/// Spectrum of the same chain with all tweezers off.
pub fn bare_spectrum(config: &ChainConfig) -> Result<ModeSpectrum> {
    let mut bare = config.clone();
    bare.tweezer_flags = vec![false; config.n_ions];
    mode_spectrum(&bare)
}

fn subsets_of_size(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|b| mask & (1 << b) != 0).map(|b| items[b]).collect());
        }
    }
    out
}

/// Gate-mode frequency with k = 0..=n_tweezed tweezed ions in the
/// potential-feeling state (the first k tweezed ions, in chain order).
pub fn conditional_spectrum(config: &ChainConfig, gate_mode: usize) -> Result<ConditionalSpectrum> {
    config.validate()?;
    if gate_mode >= config.n_ions {
        return Err(Error::domain(format!(
            "gate mode {gate_mode} out of range for {} ions",
            config.n_ions
        )));
    }
    let u = equilibrium_positions(config.n_ions)?;
    let length = length_scale(config.axial_freq, config.ion_mass)?;
    let omega_op = optical_confinement(config.light_shift, config.beam_waist, config.ion_mass)?;
    let tweezed = config.tweezed_indices();

    let freq_for = |active: &[usize]| -> Result<f64> {
        let mut flags = vec![false; config.n_ions];
        for &i in active {
            flags[i] = true;
        }
        Ok(spectrum_from(config, &u, &flags, omega_op, length)?.frequencies[gate_mode])
    };

    let mut conditional_freqs = Vec::with_capacity(tweezed.len() + 1);
    for k in 0..=tweezed.len() {
        conditional_freqs.push((k, freq_for(&tweezed[..k])?));
    }

    let subset_spread = if tweezed.len() <= MAX_SUBSET_ENUMERATION {
        let mut spread = 0.0_f64;
        for &(k, nominal) in &conditional_freqs[1..tweezed.len()] {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in subsets_of_size(&tweezed, k) {
                let f = freq_for(&s)?;
                lo = lo.min(f);
                hi = hi.max(f);
            }
            spread = spread.max((hi - lo) / nominal);
        }
        Some(spread)
    } else {
        None
    };

    let n = tweezed.len();
    let per_shift = if n == 0 {
        0.0
    } else {
        (conditional_freqs[n].1 - conditional_freqs[0].1) / n as f64
    };
    Ok(ConditionalSpectrum { base_mode_index: gate_mode, conditional_freqs, per_shift, subset_spread })
}
