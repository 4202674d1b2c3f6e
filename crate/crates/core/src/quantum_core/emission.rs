use nalgebra::DMatrix;

use super::FranckCondonMap;
use crate::units::FINE_STRUCTURE;
use crate::{Error, Result};

/// Rotational branch of an electric-dipole line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `J' = J'' - 1`
    P,
    /// `J' = J'' + 1`
    R,
}

/// Hönl-London factor for the upper-state rotational quantum number `j_prime`.
pub fn honl_london(j_prime: i32, branch: Branch) -> Result<f64> {
    if j_prime < 0 {
        return Err(Error::Domain(format!("J' must be non-negative (got {j_prime})")));
    }
    let j = j_prime as f64;
    Ok(match branch {
        Branch::P => (j + 1.0) / (2.0 * j + 1.0),
        Branch::R => j / (2.0 * j + 1.0),
    })
}

/// Spontaneous emission from the excited vibrational levels to the bound
/// ground levels (rotationless, Hönl-London factor 1).
#[derive(Debug, Clone)]
pub struct EmissionModel {
    /// `A[v', v'']` in inverse atomic time units.
    einstein: DMatrix<f64>,
    /// Total bound-bound decay rate of each excited level.
    gamma: Vec<f64>,
    /// Share of each excited level's dipole strength that is not carried by
    /// the retained bound ground levels, `1 - sum_m eta^2 / mu^2`.
    continuum_fraction: Vec<f64>,
    lifetime: f64,
    /// Pairs with non-positive transition energy, whose rate was set to zero.
    flagged: Vec<(usize, usize)>,
}

impl EmissionModel {
    pub fn einstein(&self) -> &DMatrix<f64> {
        &self.einstein
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn continuum_fraction(&self) -> &[f64] {
        &self.continuum_fraction
    }

    /// Excited-state lifetime `T_e`, by default `1 / max gamma`.
    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn with_lifetime(mut self, lifetime: f64) -> Result<Self> {
        if !(lifetime > 0.0) {
            return Err(Error::config("lifetime must be positive"));
        }
        self.lifetime = lifetime;
        Ok(self)
    }

    pub fn flagged(&self) -> &[(usize, usize)] {
        &self.flagged
    }

    /// Branching ratios `A[v', v''] / gamma[v']`; zero row when the level
    /// does not decay.
    pub fn branching(&self, excited: usize) -> Vec<f64> {
        let g = self.gamma[excited];
        self.einstein
            .row(excited)
            .iter()
            .map(|a| if g > 0.0 { a / g } else { 0.0 })
            .collect()
    }
}

/// Einstein coefficients `A = (4 alpha^3 / 3) dE^3 eta^2` with
/// `dE = gap + E^e_v' - E^g_v''`, in atomic units.
pub fn emission_model(
    fc: &FranckCondonMap,
    ground_energies: &[f64],
    excited_energies: &[f64],
    electronic_gap: f64,
) -> Result<EmissionModel> {
    if ground_energies.len() != fc.n_ground() || excited_energies.len() != fc.n_excited() {
        return Err(Error::config(format!(
            "energy vectors ({} ground, {} excited) do not match the {}x{} Franck-Condon map",
            ground_energies.len(),
            excited_energies.len(),
            fc.n_excited(),
            fc.n_ground()
        )));
    }
    let pref = 4.0 * FINE_STRUCTURE.powi(3) / 3.0;
    let mut flagged = Vec::new();
    let einstein = DMatrix::from_fn(fc.n_excited(), fc.n_ground(), |n, m| {
        let de = electronic_gap + excited_energies[n] - ground_energies[m];
        if de > 0.0 {
            pref * de.powi(3) * fc.get(n, m).powi(2)
        } else {
            flagged.push((n, m));
            0.0
        }
    });
    flagged.sort_unstable();
    let gamma: Vec<f64> = einstein.row_iter().map(|row| row.iter().sum()).collect();
    let continuum_fraction = fc.row_norms().into_iter().map(|s| (1.0 - s).max(0.0)).collect();
    let max_gamma = gamma.iter().copied().fold(0.0, f64::max);
    let lifetime = if max_gamma > 0.0 { 1.0 / max_gamma } else { f64::INFINITY };
    Ok(EmissionModel { einstein, gamma, continuum_fraction, lifetime, flagged })
}
