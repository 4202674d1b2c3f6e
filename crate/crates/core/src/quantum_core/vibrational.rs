use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Potential, SpatialGrid};
use crate::{Error, Result};

/// Momentum-space weight above this fraction of the Nyquist momentum marks
/// an under-resolved eigenfunction.
const NYQUIST_BAND: f64 = 0.8;
const NYQUIST_WEIGHT_TOL: f64 = 1e-8;

/// Bound vibrational levels of one electronic surface.
#[derive(Debug, Clone)]
pub struct VibrationalBasis {
    grid: SpatialGrid,
    mass: f64,
    energies: Vec<f64>,
    /// `n_points x n_levels`, columns normalized to `sum phi^2 dr = 1`.
    wavefunctions: DMatrix<f64>,
}

impl VibrationalBasis {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn wavefunctions(&self) -> &DMatrix<f64> {
        &self.wavefunctions
    }

    pub fn wavefunction(&self, v: usize) -> Vec<f64> {
        self.wavefunctions.column(v).iter().copied().collect()
    }

    /// `<phi_a | phi_b>` on the grid (rectangle rule).
    pub fn overlap(&self, a: usize, b: usize) -> f64 {
        self.wavefunctions.column(a).dot(&self.wavefunctions.column(b)) * self.grid.spacing()
    }

    /// Keeps only the lowest `n` levels.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_levels() {
            return Err(Error::config(format!(
                "cannot keep {n} of {} vibrational levels",
                self.n_levels()
            )));
        }
        Ok(Self {
            grid: self.grid.clone(),
            mass: self.mass,
            energies: self.energies[..n].to_vec(),
            wavefunctions: self.wavefunctions.columns(0, n).into_owned(),
        })
    }
}

/// Sinc-DVR kinetic energy matrix for a uniform grid.
fn kinetic_matrix(n: usize, dr: f64, mass: f64) -> DMatrix<f64> {
    let pref = 1.0 / (2.0 * mass * dr * dr);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            pref * PI * PI / 3.0
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            pref * sign * 2.0 / (d * d)
        }
    })
}

/// Diagonalizes `T + V` on the grid and returns the lowest bound levels.
///
/// `n_levels = None` keeps every level below the lower of the two grid-edge
/// potential values; asking for more levels than that is a resolution
/// error, as is an eigenfunction with appreciable weight near the grid's
/// Nyquist momentum.
pub fn solve_vibrational(
    pot: &Potential,
    grid: &SpatialGrid,
    mass: f64,
    n_levels: Option<usize>,
) -> Result<VibrationalBasis> {
    if !(mass > 0.0) {
        return Err(Error::config(format!("mass must be positive (got {mass})")));
    }
    let v = pot.sample(grid)?;
    let n = grid.len();
    let dr = grid.spacing();

    let mut h = kinetic_matrix(n, dr, mass);
    for (i, vi) in v.iter().enumerate() {
        h[(i, i)] += vi;
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let threshold = v[0].min(v[n - 1]);
    let n_bound = order.iter().take_while(|&&k| eig.eigenvalues[k] < threshold).count();
    let keep = match n_levels {
        Some(0) => return Err(Error::config("need at least one vibrational level")),
        Some(k) if k > n_bound => {
            return Err(Error::Resolution(format!(
                "requested {k} levels but only {n_bound} lie below the grid-edge energy {threshold:.6e} Eh"
            )))
        }
        Some(k) => k,
        None if n_bound == 0 => {
            return Err(Error::Resolution("no bound level on this grid".into()))
        }
        None => n_bound,
    };

    let norm = 1.0 / dr.sqrt();
    let mut energies = Vec::with_capacity(keep);
    let mut wf = DMatrix::zeros(n, keep);
    for (col, &k) in order.iter().take(keep).enumerate() {
        energies.push(eig.eigenvalues[k]);
        let vec = eig.eigenvectors.column(k);
        let max = vec.amax();
        let first = vec.iter().find(|x| x.abs() > 1e-3 * max).copied().unwrap_or(1.0);
        let sign = if first < 0.0 { -norm } else { norm };
        for i in 0..n {
            wf[(i, col)] = sign * vec[i];
        }
    }

    check_nyquist(&wf, grid)?;

    Ok(VibrationalBasis { grid: grid.clone(), mass, energies, wavefunctions: wf })
}

fn check_nyquist(wf: &DMatrix<f64>, grid: &SpatialGrid) -> Result<()> {
    let n = grid.len();
    let k = grid.momentum_grid();
    let k_cut = NYQUIST_BAND * grid.max_momentum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for level in 0..wf.ncols() {
        for (b, x) in buf.iter_mut().zip(wf.column(level).iter()) {
            *b = Complex64::new(*x, 0.0);
        }
        fft.process(&mut buf);
        let total: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        let high: f64 = buf
            .iter()
            .zip(&k)
            .filter(|(_, kj)| kj.abs() > k_cut)
            .map(|(c, _)| c.norm_sqr())
            .sum();
        if high > NYQUIST_WEIGHT_TOL * total {
            return Err(Error::Resolution(format!(
                "level {level} has {:.2e} of its momentum density above {:.0}% of the Nyquist momentum; refine the grid",
                high / total,
                NYQUIST_BAND * 100.0
            )));
        }
    }
    Ok(())
}

/// Largest relative change of the lowest `n_levels` eigenvalues when the
/// number of grid points is doubled over the same interval.
pub fn check_convergence(
    pot: &Potential,
    grid: &SpatialGrid,
    mass: f64,
    n_levels: usize,
) -> Result<f64> {
    let coarse = solve_vibrational(pot, grid, mass, Some(n_levels))?;
    let fine_grid = SpatialGrid::new(grid.r_min(), grid.r_max(), 2 * grid.len())?;
    let fine = solve_vibrational(pot, &fine_grid, mass, Some(n_levels))?;
    Ok(coarse
        .energies()
        .iter()
        .zip(fine.energies())
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max))
}
