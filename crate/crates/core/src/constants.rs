//! Physical constants (CODATA 2018, SI units).
//!
//! Everything else in the crate works in units of the mechanical angular
//! frequency ω_m; these values are only touched at the SI boundary.

/// Reduced Planck constant ħ in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B in J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Bohr magneton μ_B in J/T.
pub const MU_B: f64 = 9.274_010_078_3e-24;

/// Electron g-factor of the NV ground-state triplet.
pub const G_E_NV: f64 = 2.0028;

/// 2π, for converting ordinary frequencies (Hz) into angular ones.
pub const TWO_PI: f64 = std::f64::consts::TAU;
