//! Field-free structure of the two-surface molecule: spatial grid, model
//! potentials, vibrational eigenstates, Franck-Condon map and spontaneous
//! emission rates.
//!
//! All types here are immutable once built and can be shared freely between
//! threads.

mod emission;
mod franck_condon;
mod grid;
mod potential;
mod vibrational;

pub use emission::{emission_model, honl_london, Branch, EmissionModel};
pub use franck_condon::{franck_condon_map, FranckCondonMap};
pub use grid::SpatialGrid;
pub use potential::{load_tabulated, parse_tabulated, Potential};
pub use vibrational::{check_convergence, solve_vibrational, VibrationalBasis};
