use nalgebra::DMatrix;

use super::VibrationalBasis;
use crate::{Error, Result};

/// Transition dipole matrix elements `eta[n, m] = <phi^e_n | mu | phi^g_m>`
/// between excited levels `n` (rows) and ground levels `m` (columns), for an
/// R-independent dipole `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FranckCondonMap {
    eta: DMatrix<f64>,
    dipole: f64,
}

impl FranckCondonMap {
    /// Wraps a hand-built matrix, e.g. for few-level model systems.
    pub fn from_matrix(eta: DMatrix<f64>, dipole: f64) -> Result<Self> {
        if eta.iter().any(|x| !x.is_finite()) || !dipole.is_finite() {
            return Err(Error::config("Franck-Condon matrix must be finite"));
        }
        Ok(Self { eta, dipole })
    }

    pub fn eta(&self) -> &DMatrix<f64> {
        &self.eta
    }

    pub fn get(&self, excited: usize, ground: usize) -> f64 {
        self.eta[(excited, ground)]
    }

    pub fn dipole(&self) -> f64 {
        self.dipole
    }

    pub fn n_excited(&self) -> usize {
        self.eta.nrows()
    }

    pub fn n_ground(&self) -> usize {
        self.eta.ncols()
    }

    /// `sum_m eta[n, m]^2 / mu^2` for every excited level; at most one.
    pub fn row_norms(&self) -> Vec<f64> {
        let mu2 = self.dipole * self.dipole;
        self.eta.row_iter().map(|row| row.norm_squared() / mu2).collect()
    }

    /// Matrix as CSV with the ground levels `v''` across and the excited
    /// levels `v'` down; `comments` become leading `#` lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("v'\\v''");
        for m in 0..self.n_ground() {
            out.push_str(&format!(",{m}"));
        }
        out.push('\n');
        for n in 0..self.n_excited() {
            out.push_str(&n.to_string());
            for m in 0..self.n_ground() {
                out.push_str(&format!(",{:.16e}", self.eta[(n, m)]));
            }
            out.push('\n');
        }
        out
    }
}

/// `eta[n, m] = mu * sum_r phi^e_n(r) phi^g_m(r) dr`.
pub fn franck_condon_map(
    ground: &VibrationalBasis,
    excited: &VibrationalBasis,
    dipole: f64,
) -> Result<FranckCondonMap> {
    if ground.grid() != excited.grid() {
        return Err(Error::config("ground and excited bases live on different grids"));
    }
    let dr = ground.grid().spacing();
    let eta = excited.wavefunctions().transpose() * ground.wavefunctions() * (dipole * dr);
    FranckCondonMap::from_matrix(eta, dipole)
}
