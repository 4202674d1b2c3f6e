//! Bundled model molecules.
//!
//! * `compact-parabola`: excited surface slightly displaced from the ground
//!   one, giving a near-diagonal Franck-Condon map with strong decay into
//!   `v'' = 0`.
//! * `diffuse`: shallow, displaced excited surface. No excited level
//!   returns more than about 40% of its decays to `v'' = 0`, and the higher
//!   ones decay largely into high ground levels.
//! * `harmonic`: two displaced harmonic wells, for analytic checks.

use crate::functionals::Variant;
use crate::pulse::{gaussian_guess, Pulse, ShapeFunction, TimeGrid};
use crate::quantum_core::{Potential, SpatialGrid};
use crate::system::{MolecularSystem, SystemSpec};
use crate::{Error, Result};

pub const PRESET_NAMES: [&str; 3] = ["compact-parabola", "diffuse", "harmonic"];

/// Guess-pulse parameters, all in atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessPulse {
    pub t_final: f64,
    pub n_steps: usize,
    pub center: f64,
    pub fwhm: f64,
    pub peak: f64,
    pub detuning: f64,
    /// The carrier is tuned to the `v'' -> v'` line given here.
    pub carrier_line: (usize, usize),
    pub t_ramp: Option<f64>,
}

impl GuessPulse {
    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_final, self.n_steps)
    }

    pub fn shape(&self) -> Result<ShapeFunction> {
        let grid = self.time_grid()?;
        match self.t_ramp {
            Some(t) => ShapeFunction::new(t, grid.t_final()),
            None => Ok(ShapeFunction::default_for(&grid)),
        }
    }

    pub fn carrier(&self, system: &MolecularSystem) -> Result<f64> {
        let (g, e) = self.carrier_line;
        if g >= system.n_ground() || e >= system.n_excited() {
            return Err(Error::config(format!("carrier line {g} -> {e} outside the retained levels")));
        }
        Ok(system.transition_energy(g, e))
    }

    /// Gaussian guess under the shape function.
    pub fn build(&self, system: &MolecularSystem) -> Result<Pulse> {
        let omega_l = self.carrier(system)?;
        let p = gaussian_guess(self.time_grid()?, self.center, self.fwhm, self.peak, self.detuning, omega_l)?;
        Ok(p.shaped(&self.shape()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub system: SystemSpec,
    pub pulse: GuessPulse,
    pub n_max: usize,
    /// Krotov step-size parameters for the two functionals.
    pub lambda_sym: f64,
    pub lambda_ass: f64,
}

impl Preset {
    pub fn lambda(&self, variant: Variant) -> f64 {
        match variant {
            Variant::Symmetrized => self.lambda_sym,
            Variant::Assembly => self.lambda_ass,
        }
    }
}

const MASS: f64 = 1.0e4;
const GAP: f64 = 0.07;

fn grid() -> SpatialGrid {
    SpatialGrid::new(3.5, 24.0, 256).expect("valid grid")
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "compact-parabola" => Ok(Preset {
            name: "compact-parabola",
            system: SystemSpec {
                mass: MASS,
                grid: grid(),
                ground: Potential::morse(0.02, 0.7, 6.0),
                excited: Potential::morse(0.015, 0.6, 6.3),
                electronic_gap: GAP,
                dipole: 1.0,
                n_ground: Some(18),
                n_excited: Some(16),
                lifetime: None,
            },
            pulse: GuessPulse {
                t_final: 160_000.0,
                n_steps: 1600,
                center: 80_000.0,
                fwhm: 32_000.0,
                peak: 2.0e-4,
                detuning: 0.0,
                carrier_line: (3, 2),
                t_ramp: None,
            },
            n_max: 10,
            lambda_sym: 30000.0,
            lambda_ass: 4000.0,
        }),
        "diffuse" => Ok(Preset {
            name: "diffuse",
            system: SystemSpec {
                mass: MASS,
                grid: grid(),
                ground: Potential::morse(0.02, 0.7, 6.0),
                excited: Potential::morse(0.008, 0.45, 6.5),
                electronic_gap: GAP,
                dipole: 1.0,
                n_ground: Some(18),
                n_excited: Some(18),
                lifetime: None,
            },
            pulse: GuessPulse {
                t_final: 160_000.0,
                n_steps: 1600,
                center: 80_000.0,
                fwhm: 32_000.0,
                peak: 2.0e-4,
                detuning: 0.0,
                carrier_line: (3, 2),
                t_ramp: None,
            },
            n_max: 5,
            lambda_sym: 12000.0,
            lambda_ass: 8000.0,
        }),
        "harmonic" => Ok(Preset {
            name: "harmonic",
            system: SystemSpec {
                mass: MASS,
                grid: SpatialGrid::new(3.0, 9.0, 128).expect("valid grid"),
                ground: Potential::harmonic(0.0014, MASS, 6.0),
                excited: Potential::harmonic(0.0014, MASS, 6.2),
                electronic_gap: GAP,
                dipole: 1.0,
                n_ground: Some(12),
                n_excited: Some(12),
                lifetime: None,
            },
            pulse: GuessPulse {
                t_final: 40_000.0,
                n_steps: 400,
                center: 20_000.0,
                fwhm: 8_000.0,
                peak: 2.0e-4,
                detuning: 0.0,
                carrier_line: (1, 0),
                t_ramp: None,
            },
            n_max: 3,
            lambda_sym: 1000.0,
            lambda_ass: 1000.0,
        }),
        other => Err(Error::config(format!(
            "unknown preset '{other}' (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
