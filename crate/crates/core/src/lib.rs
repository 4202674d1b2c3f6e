//! Optimal-control pulse shaping for laser cooling of molecular vibrations.
//!
//! The crate models a diatomic molecule with two electronic surfaces coupled
//! by a shaped, rotating-wave laser pulse. It provides the static structure
//! of the molecule (vibrational levels, Franck-Condon map, Einstein
//! coefficients), a unitary propagator in the vibrational eigenbasis, the
//! cooling functionals with their costate boundary conditions, a Krotov
//! optimizer for the pulse, and a rate-level simulation of repeated
//! excitation / spontaneous-emission cooling cycles.
//!
//! Everything is in atomic units internally; see [`units`] for conversions.

pub mod cooling;
pub mod error;
pub mod functionals;
pub mod krotov;
pub mod presets;
pub mod propagator;
pub mod pulse;
pub mod quantum_core;
pub mod system;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
