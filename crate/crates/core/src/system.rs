//! A diatomic molecule with one ground and one excited electronic surface.

use crate::propagator::TwoSurfaceHamiltonian;
use crate::quantum_core::{
    emission_model, franck_condon_map, solve_vibrational, EmissionModel, FranckCondonMap, Potential, SpatialGrid,
    VibrationalBasis,
};
use crate::{Error, Result};

/// Everything needed to build a [`MolecularSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Reduced mass (electron masses).
    pub mass: f64,
    pub grid: SpatialGrid,
    pub ground: Potential,
    pub excited: Potential,
    /// Energy of the excited surface's asymptote-free origin above the ground
    /// one (Hartree).
    pub electronic_gap: f64,
    /// Constant transition dipole (atomic units).
    pub dipole: f64,
    /// Retained ground levels; all bound levels when `None`.
    pub n_ground: Option<usize>,
    pub n_excited: Option<usize>,
    /// Overrides the excited lifetime derived from the Einstein coefficients.
    pub lifetime: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MolecularSystem {
    spec: SystemSpec,
    ground: VibrationalBasis,
    excited: VibrationalBasis,
    fc: FranckCondonMap,
    emission: EmissionModel,
}

impl MolecularSystem {
    pub fn build(spec: SystemSpec) -> Result<Self> {
        if !(spec.electronic_gap > 0.0) {
            return Err(Error::config("electronic gap must be positive"));
        }
        if !(spec.dipole.is_finite() && spec.dipole != 0.0) {
            return Err(Error::config("transition dipole must be finite and non-zero"));
        }
        let ground = solve_vibrational(&spec.ground, &spec.grid, spec.mass, spec.n_ground)?;
        let excited = solve_vibrational(&spec.excited, &spec.grid, spec.mass, spec.n_excited)?;
        let fc = franck_condon_map(&ground, &excited, spec.dipole)?;
        let mut emission = emission_model(&fc, ground.energies(), excited.energies(), spec.electronic_gap)?;
        if let Some(t) = spec.lifetime {
            emission = emission.with_lifetime(t)?;
        }
        Ok(Self { spec, ground, excited, fc, emission })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn ground(&self) -> &VibrationalBasis {
        &self.ground
    }

    pub fn excited(&self) -> &VibrationalBasis {
        &self.excited
    }

    pub fn franck_condon(&self) -> &FranckCondonMap {
        &self.fc
    }

    pub fn emission(&self) -> &EmissionModel {
        &self.emission
    }

    pub fn n_ground(&self) -> usize {
        self.ground.n_levels()
    }

    pub fn n_excited(&self) -> usize {
        self.excited.n_levels()
    }

    /// Photon energy of the `v'' -> v'` line.
    pub fn transition_energy(&self, ground: usize, excited: usize) -> f64 {
        self.spec.electronic_gap + self.excited.energies()[excited] - self.ground.energies()[ground]
    }

    pub fn hamiltonian(&self, omega_l: f64) -> Result<TwoSurfaceHamiltonian> {
        TwoSurfaceHamiltonian::new(
            self.ground.energies(),
            self.excited.energies(),
            self.spec.electronic_gap,
            omega_l,
            &self.fc,
        )
    }
}
