//! Repeated optical pumping with a fixed pulse.
//!
//! Each cycle applies the pulse coherently to every ground level, lets the
//! remaining excited population decay completely according to the Einstein
//! coefficients, and discards ground-state coherences. The cycle is therefore
//! a fixed linear map on the ground-level populations.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::propagator::{Propagator, TwoSurfaceHamiltonian, TwoSurfaceState};
use crate::pulse::Pulse;
use crate::quantum_core::EmissionModel;
use crate::{Error, Result};

/// Ground-level populations between pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingState {
    pub populations: Vec<f64>,
    /// Probability that left the retained levels (dissociation, unbound or
    /// discarded levels).
    pub lost: f64,
    pub cycle: usize,
}

impl CoolingState {
    pub fn new(populations: Vec<f64>) -> Result<Self> {
        if populations.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::config("populations must be finite and non-negative"));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("populations sum to {total}, not 1")));
        }
        Ok(Self { populations, lost: 0.0, cycle: 0 })
    }

    /// Equal population in levels `first..=last` out of `n_levels`.
    pub fn equipartition(n_levels: usize, first: usize, last: usize) -> Result<Self> {
        if first > last || last >= n_levels {
            return Err(Error::config(format!("levels {first}..={last} not within 0..{n_levels}")));
        }
        let w = 1.0 / (last - first + 1) as f64;
        let mut p = vec![0.0; n_levels];
        for x in &mut p[first..=last] {
            *x = w;
        }
        Self::new(p)
    }

    pub fn target_population(&self) -> f64 {
        self.populations[0]
    }

    pub fn retained(&self) -> f64 {
        self.populations.iter().sum()
    }

    /// `sum p_i^2` of the retained distribution renormalized to one.
    pub fn purity(&self) -> f64 {
        let total = self.retained();
        if total <= 0.0 {
            return 0.0;
        }
        self.populations.iter().map(|p| p * p).sum::<f64>() / (total * total)
    }
}

/// Linear map from pre-pulse to post-emission ground populations.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleMap {
    /// `matrix[(k, m)]`: probability that a molecule in level `m` ends the
    /// cycle in level `k`.
    matrix: DMatrix<f64>,
    /// Probability that a molecule in level `m` is lost during the cycle.
    lost: Vec<f64>,
}

impl CycleMap {
    /// Map with losses taken as the column-sum deficit.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::config("cycle map must be square"));
        }
        if matrix.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::config("cycle map entries must be finite and non-negative"));
        }
        let mut lost = Vec::with_capacity(matrix.ncols());
        for (m, col) in matrix.column_iter().enumerate() {
            let s: f64 = col.iter().sum();
            if s > 1.0 + 1e-9 {
                return Err(Error::config(format!("column {m} sums to {s} > 1")));
            }
            lost.push((1.0 - s).max(0.0));
        }
        Ok(Self { matrix, lost })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n), lost: vec![0.0; n] }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn lost(&self) -> &[f64] {
        &self.lost
    }

    pub fn n_levels(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, state: &CoolingState) -> CoolingState {
        let p = DVector::from_column_slice(&state.populations);
        let next = &self.matrix * &p;
        let lost = state.lost + self.lost.iter().zip(&state.populations).map(|(l, p)| l * p).sum::<f64>();
        CoolingState { populations: next.iter().map(|x| x.max(0.0)).collect(), lost, cycle: state.cycle + 1 }
    }
}

/// Propagates every ground level through `pulse` and routes the excited
/// population through the emission branching ratios.
pub fn build_cycle_map(ham: &TwoSurfaceHamiltonian, pulse: &Pulse, emission: &EmissionModel) -> Result<CycleMap> {
    let (ng, ne) = (ham.n_ground(), ham.n_excited());
    if emission.einstein().nrows() != ne || emission.einstein().ncols() != ng {
        return Err(Error::config("emission model does not match the Hamiltonian"));
    }
    let branching: Vec<Vec<f64>> = (0..ne).map(|l| emission.branching(l)).collect();
    let columns: Vec<(Vec<f64>, f64)> = (0..ng)
        .into_par_iter()
        .map(|m| {
            let psi = Propagator::new(ham).propagate(&TwoSurfaceState::ground_level(ng, ne, m), pulse)?;
            let (col, lost) = route(&psi, emission, &branching);
            Ok((col, lost))
        })
        .collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(ng, ng, |k, m| columns[m].0[k]);
    let lost = columns.into_iter().map(|(_, l)| l).collect();
    Ok(CycleMap { matrix, lost })
}

/// Ground populations after complete decay of `psi`, and the lost share.
fn route(psi: &TwoSurfaceState, emission: &EmissionModel, branching: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut col: Vec<f64> = psi.ground().iter().map(|c| c.norm_sqr()).collect();
    let mut lost = 1.0 - psi.norm_sqr();
    for (l, c) in psi.excited().iter().enumerate() {
        let pe = c.norm_sqr();
        if emission.gamma()[l] > 0.0 {
            let q = emission.continuum_fraction()[l];
            lost += pe * q;
            for (k, b) in branching[l].iter().enumerate() {
                col[k] += pe * (1.0 - q) * b;
            }
        } else {
            lost += pe;
        }
    }
    (col, lost.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingSummary {
    /// First cycle after which `p_0 >= 0.9`.
    pub cycles_to_90pct: Option<usize>,
    pub max_target_population: f64,
    pub cycles_at_max: usize,
    pub final_target_population: f64,
    pub final_purity: f64,
    pub final_lost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingHistory {
    /// Initial state followed by the state after every cycle.
    pub states: Vec<CoolingState>,
    pub summary: CoolingSummary,
}

impl CoolingHistory {
    pub fn purity_trace(&self) -> Vec<f64> {
        self.states.iter().map(CoolingState::purity).collect()
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("# units: populations and purity dimensionless\n");
        let n = self.states.first().map_or(0, |s| s.populations.len());
        out.push_str("cycle");
        for k in 0..n {
            out.push_str(&format!(",p_{k}"));
        }
        out.push_str(",lost,purity\n");
        for s in &self.states {
            out.push_str(&s.cycle.to_string());
            for p in &s.populations {
                out.push_str(&format!(",{p:.16e}"));
            }
            out.push_str(&format!(",{:.16e},{:.16e}\n", s.lost, s.purity()));
        }
        out
    }
}

pub fn simulate_cooling(initial: &CoolingState, map: &CycleMap, n_cycles: usize) -> Result<CoolingHistory> {
    if initial.populations.len() != map.n_levels() {
        return Err(Error::config(format!(
            "initial state has {} levels, cycle map {}",
            initial.populations.len(),
            map.n_levels()
        )));
    }
    let mut states = Vec::with_capacity(n_cycles + 1);
    states.push(initial.clone());
    for _ in 0..n_cycles {
        let next = map.apply(states.last().unwrap());
        states.push(next);
    }
    let cycles_to_90pct = states.iter().find(|s| s.target_population() >= 0.9).map(|s| s.cycle);
    let (cycles_at_max, max_target_population) = states
        .iter()
        .map(|s| (s.cycle, s.target_population()))
        .fold((0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best });
    let last = states.last().unwrap();
    let summary = CoolingSummary {
        cycles_to_90pct,
        max_target_population,
        cycles_at_max,
        final_target_population: last.target_population(),
        final_purity: last.purity(),
        final_lost: last.lost,
    };
    Ok(CoolingHistory { states, summary })
}
