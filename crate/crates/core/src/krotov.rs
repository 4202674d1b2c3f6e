//! Krotov's method for the cooling functionals.
//!
//! Each iteration propagates the costates backward under the current field
//! and then sweeps forward in time, updating the field sample at `t_k` from
//! the old costates and the *new* states before advancing those states with
//! the updated sample.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::functionals::{costate_boundary, eval_terms, FunctionalConfig, TargetOperators, TermRecord};
use crate::propagator::{propagate_backward, Propagator, Trajectory, TwoSurfaceHamiltonian, TwoSurfaceState};
use crate::pulse::{Pulse, ShapeFunction};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KrotovOptions {
    /// Inverse step size; larger values give smaller, safer updates.
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop once the decrease of `J_T` falls below this.
    pub tolerance: f64,
    /// Allowed increase of `J_T` before the run is aborted.
    pub tol_mono: f64,
    pub shape: ShapeFunction,
    /// Reserved; must stay `false`.
    pub use_nonlinear_sigma: bool,
    /// Costate trajectories keep every `stride`-th state.
    pub stride: usize,
}

impl KrotovOptions {
    pub fn new(lambda: f64, shape: ShapeFunction) -> Self {
        Self {
            lambda,
            max_iterations: 1000,
            tolerance: 1e-10,
            tol_mono: 1e-10,
            shape,
            use_nonlinear_sigma: false,
            stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.tol_mono >= 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::config("tolerances must be non-negative"));
        }
        if self.use_nonlinear_sigma {
            return Err(Error::config("the second-order Krotov update is not available"));
        }
        if self.stride == 0 {
            return Err(Error::config("stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub terms: TermRecord,
    /// Fluence-change cost of the update that produced this iterate.
    pub j_t: f64,
    /// `J_T` of the previous iterate minus this one.
    pub delta_j: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub pulse: Pulse,
    /// Guess first, then one record per iteration.
    pub records: Vec<IterationRecord>,
    pub final_states: Vec<TwoSurfaceState>,
    pub converged: bool,
    pub wall_seconds: f64,
}

impl OptimizationResult {
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn final_terms(&self) -> &TermRecord {
        &self.records.last().expect("records include the guess").terms
    }

    pub fn convergence_csv(&self, comments: &[String]) -> String {
        convergence_csv(&self.records, comments)
    }
}

pub fn convergence_csv(records: &[IterationRecord], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str("# units: all functional values dimensionless\n");
    if let Some(first) = records.first() {
        out.push_str(&crate::functionals::convergence_header(first.terms.variant));
        out.push('\n');
    }
    for r in records {
        let t = &r.terms;
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.iteration, t.j_t, t.j_ss, t.j_leak, t.j_yield, t.j_balance, r.j_t
        ));
    }
    out
}

/// One field sample of the first-order update,
/// `eps + (S/lambda) * (-Im <chi|mu|psi> - i Im <chi|i(M - M^dag)|psi>)`,
/// summed over the ensemble, where `M` maps ground to excited amplitudes
/// through `eta` and `mu = M + M^dag`.
pub fn update_step(
    ham: &TwoSurfaceHamiltonian,
    chi: &[TwoSurfaceState],
    psi: &[TwoSurfaceState],
    shape_value: f64,
    lambda: f64,
    prev: Complex64,
) -> Complex64 {
    if shape_value == 0.0 {
        return prev;
    }
    let (ng, ne) = (ham.n_ground(), ham.n_excited());
    // x = <chi|M|psi>, y = <chi|M^dag|psi>
    let mut x = Complex64::new(0.0, 0.0);
    let mut y = Complex64::new(0.0, 0.0);
    for (c, p) in chi.iter().zip(psi) {
        let (cg, ce) = (c.ground(), c.excited());
        let (pg, pe) = (p.ground(), p.excited());
        for l in 0..ne {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..ng {
                acc += pg[m] * ham.eta(l, m);
            }
            x += ce[l].conj() * acc;
        }
        for m in 0..ng {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..ne {
                acc += pe[l] * ham.eta(l, m);
            }
            y += cg[m].conj() * acc;
        }
    }
    let grad = Complex64::new((x + y).im, (x - y).re);
    prev - grad * (shape_value / lambda)
}

fn initial_states(ham: &TwoSurfaceHamiltonian, n_max: usize) -> Vec<TwoSurfaceState> {
    (0..=n_max).map(|n| TwoSurfaceState::ground_level(ham.n_ground(), ham.n_excited(), n)).collect()
}

fn forward_final(ham: &TwoSurfaceHamiltonian, pulse: &Pulse, n_max: usize) -> Result<Vec<TwoSurfaceState>> {
    initial_states(ham, n_max)
        .par_iter()
        .map(|s| Propagator::new(ham).propagate(s, pulse))
        .collect()
}

/// Result of a single Krotov iteration.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub pulse: Pulse,
    pub final_states: Vec<TwoSurfaceState>,
    /// Fluence-change cost of the update.
    pub j_t: f64,
}

/// Backward costate trajectories under `pulse`.
pub fn costate_trajectories(
    ham: &TwoSurfaceHamiltonian,
    pulse: &Pulse,
    final_states: &[TwoSurfaceState],
    cfg: &FunctionalConfig,
    ops: &TargetOperators,
    stride: usize,
) -> Result<Vec<Trajectory>> {
    let chi_t = costate_boundary(final_states, cfg, ops)?;
    chi_t
        .par_iter()
        .map(|chi| propagate_backward(&mut Propagator::new(ham), chi, pulse, stride))
        .collect()
}

/// Performs one iteration starting from `pulse` whose forward final states
/// are `final_states`.
pub fn krotov_iteration(
    ham: &TwoSurfaceHamiltonian,
    pulse: &Pulse,
    final_states: &[TwoSurfaceState],
    cfg: &FunctionalConfig,
    ops: &TargetOperators,
    opts: &KrotovOptions,
) -> Result<Iteration> {
    let costates = costate_trajectories(ham, pulse, final_states, cfg, ops, opts.stride)?;
    let grid = *pulse.grid();
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut new_pulse = pulse.clone();
    let mut psi = initial_states(ham, cfg.n_max);
    let mut prop = Propagator::new(ham);
    let mut j_t = 0.0;
    let n_blocks = costates[0].n_blocks();
    for b in 0..n_blocks {
        let blocks: Vec<Vec<TwoSurfaceState>> =
            costates.iter().map(|tr| tr.block(&mut prop, b)).collect::<Result<_>>()?;
        let k0 = b * opts.stride;
        let last = b + 1 == n_blocks;
        let len = blocks[0].len();
        // the block end is the next block's start unless this is the last one
        let upto = if last { len } else { len - 1 };
        for i in 0..upto {
            let k = k0 + i;
            let chi: Vec<TwoSurfaceState> = blocks.iter().map(|blk| blk[i].clone()).collect();
            let s = opts.shape.eval(grid.time(k));
            let old = pulse.sample(k);
            let eps = update_step(ham, &chi, &psi, s, opts.lambda, old);
            if !eps.is_finite() {
                return Err(Error::NumericalBlowup { step: k });
            }
            new_pulse.envelope_mut()[k] = eps;
            if k < n {
                if s > 0.0 {
                    j_t += opts.lambda / s * (eps - old).norm_sqr() * dt;
                }
                for p in psi.iter_mut() {
                    prop.step(p, eps, dt)?;
                    if !p.is_finite() {
                        return Err(Error::NumericalBlowup { step: k });
                    }
                }
            }
        }
    }
    Ok(Iteration { pulse: new_pulse, final_states: psi, j_t })
}

pub fn optimize(
    ham: &TwoSurfaceHamiltonian,
    ops: &TargetOperators,
    guess: &Pulse,
    cfg: &FunctionalConfig,
    opts: &KrotovOptions,
) -> Result<OptimizationResult> {
    optimize_with_observer(ham, ops, guess, cfg, opts, |_| {})
}

/// As [`optimize`], calling `observer` after the guess and every iteration.
pub fn optimize_with_observer<F: FnMut(&IterationRecord)>(
    ham: &TwoSurfaceHamiltonian,
    ops: &TargetOperators,
    guess: &Pulse,
    cfg: &FunctionalConfig,
    opts: &KrotovOptions,
    mut observer: F,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let mut pulse = guess.clone();
    let mut finals = forward_final(ham, &pulse, cfg.n_max)?;
    let terms = eval_terms(&finals, cfg, ops)?;
    let mut records = vec![IterationRecord { iteration: 0, terms, j_t: 0.0, delta_j: 0.0 }];
    observer(&records[0]);
    let mut converged = false;
    for it in 1..=opts.max_iterations {
        let step = krotov_iteration(ham, &pulse, &finals, cfg, ops, opts)?;
        let terms = eval_terms(&step.final_states, cfg, ops)?;
        let before = records.last().unwrap().terms.j_t;
        let after = terms.j_t;
        if after > before + opts.tol_mono {
            return Err(Error::NonMonotonic { iteration: it, before, after, lambda: opts.lambda });
        }
        let rec = IterationRecord { iteration: it, terms, j_t: step.j_t, delta_j: before - after };
        observer(&rec);
        records.push(rec);
        pulse = step.pulse;
        finals = step.final_states;
        if (before - after).abs() < opts.tolerance {
            converged = true;
            break;
        }
    }
    Ok(OptimizationResult { pulse, records, final_states: finals, converged, wall_seconds: start.elapsed().as_secs_f64() })
}
