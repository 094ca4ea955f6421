//! Unit conversions at the I/O boundary.
//!
//! Everything inside the engine is in atomic units (hartree, bohr, electron
//! masses). Values read from or written to files pass through these helpers.

/// Wavenumbers per hartree (CODATA 2018).
pub const CM1_PER_HARTREE: f64 = 219_474.631_363_2;

/// Boltzmann constant in hartree per kelvin (CODATA 2018).
pub const BOLTZMANN_HARTREE_PER_K: f64 = 3.166_811_563e-6;

/// Electron masses per unified atomic mass unit (CODATA 2018).
pub const ELECTRON_MASSES_PER_AMU: f64 = 1_822.888_486_209;

#[inline]
pub fn cm1_to_hartree(e: f64) -> f64 {
    e / CM1_PER_HARTREE
}

#[inline]
pub fn hartree_to_cm1(e: f64) -> f64 {
    e * CM1_PER_HARTREE
}

#[inline]
pub fn amu_to_me(m: f64) -> f64 {
    m * ELECTRON_MASSES_PER_AMU
}

#[inline]
pub fn kelvin_to_hartree(t: f64) -> f64 {
    t * BOLTZMANN_HARTREE_PER_K
}
