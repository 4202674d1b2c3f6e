use std::f64::consts::PI;

use crate::{Error, Result};

/// Uniform grid in the internuclear distance R, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    r_min: f64,
    r_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    /// Builds a grid of `n_points` (a power of two, at least 16) covering
    /// `[r_min, r_max]` in bohr.
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_min >= r_max {
            return Err(Error::config(format!(
                "grid bounds must satisfy r_min < r_max (got {r_min}, {r_max})"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::config(format!(
                "grid size must be a power of two >= 16 (got {n_points})"
            )));
        }
        Ok(Self { r_min, r_max, n_points })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Conjugate momenta in FFT order: `0, dk, ..., -dk`, with
    /// `dk = 2 pi / (n dr)`.
    pub fn momentum_grid(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (n as f64 * self.spacing());
        (0..n)
            .map(|j| {
                if j < n / 2 {
                    j as f64 * dk
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect()
    }

    /// Largest representable momentum, `pi / dr`.
    pub fn max_momentum(&self) -> f64 {
        PI / self.spacing()
    }
}
