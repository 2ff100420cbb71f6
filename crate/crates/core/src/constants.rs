//! Physical constants (CODATA 2018). Fixed at compile time so that golden
//! values are reproducible.

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;
/// Mass of ⁴⁰Ca in atomic mass units.
pub const CA40_MASS_AMU: f64 = 39.9625908;

/// Mass of a ⁴⁰Ca⁺ ion, kg (electron mass neglected).
pub const CA40_MASS: f64 = CA40_MASS_AMU * ATOMIC_MASS_UNIT;

/// Bundle of the constants above, for callers that want them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
    pub atomic_mass_unit: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        elementary_charge: ELEMENTARY_CHARGE,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        atomic_mass_unit: ATOMIC_MASS_UNIT,
    };

    /// Coulomb constant e²/(4πε₀), J·m.
    pub fn coulomb(&self) -> f64 {
        self.elementary_charge * self.elementary_charge / (4.0 * PI * self.vacuum_permittivity)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Converts an ordinary frequency in Hz to angular frequency in rad/s.
#[inline]
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

/// Converts angular frequency in rad/s to an ordinary frequency in Hz.
#[inline]
pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
