//! Physical constants used throughout the crate, in SI units.

/// Speed of light in vacuum [m/s] (exact, by definition of the metre).
pub const C0: f64 = 299_792_458.0;

/// Vacuum permeability [H/m] (2018 CODATA).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Impedance of free space [ohm], eta0 = mu0 * c0.
pub const ETA0: f64 = MU0 * C0;
