//! Unit conversions. Atomic units (hbar = e = m_e = 1) are used throughout
//! the crate; the constants below convert to the laboratory units accepted
//! by the configuration front end (cm^-1, fs, Debye, Angstrom).
//!
//! Values are CODATA 2018.

/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// 1 Hartree in cm^-1.
pub const HARTREE_TO_WAVENUMBER: f64 = 219_474.631_363_20;
/// 1 Hartree in eV.
pub const HARTREE_TO_EV: f64 = 27.211_386_245_988;
/// 1 bohr in Angstrom.
pub const BOHR_TO_ANGSTROM: f64 = 0.529_177_210_903;
/// 1 atomic time unit in femtoseconds.
pub const AU_TIME_TO_FS: f64 = 2.418_884_326_585_7e-2;
/// 1 atomic time unit in seconds.
pub const AU_TIME_TO_SECONDS: f64 = 2.418_884_326_585_7e-17;
/// 1 Debye in atomic units of dipole (e a0).
pub const DEBYE_TO_AU: f64 = 0.393_430_269_4;
/// 1 unified atomic mass unit in electron masses.
pub const AMU_TO_ELECTRON_MASS: f64 = 1_822.888_486_209;
/// 1 atomic unit of electric field in V/m.
pub const AU_FIELD_TO_V_PER_M: f64 = 5.142_206_747_63e11;
/// Vacuum permittivity in F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn hartree_to_wavenumber(e: f64) -> f64 {
    e * HARTREE_TO_WAVENUMBER
}

pub fn wavenumber_to_hartree(k: f64) -> f64 {
    k / HARTREE_TO_WAVENUMBER
}

pub fn fs_to_au(t: f64) -> f64 {
    t / AU_TIME_TO_FS
}

pub fn au_to_fs(t: f64) -> f64 {
    t * AU_TIME_TO_FS
}

pub fn angstrom_to_bohr(r: f64) -> f64 {
    r / BOHR_TO_ANGSTROM
}
