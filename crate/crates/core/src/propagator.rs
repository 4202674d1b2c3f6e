//! Two-surface wavepacket propagation in the vibrational eigenbasis.
//!
//! The rotating-wave Hamiltonian is
//!
//! ```text
//!     | E^g            eps*(t) eta^T / 2 |
//! H = |                                  |
//!     | eps(t) eta / 2   E^e + gap - w_L |
//! ```
//!
//! with diagonal blocks from the field-free vibrational energies and the
//! Franck-Condon map `eta` as the coupling. The field is piecewise constant
//! over each time step and every step applies `exp(-i H dt)` through a
//! Chebyshev expansion.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pulse::Pulse;
use crate::quantum_core::FranckCondonMap;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitudes on the ground levels followed by the excited levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSurfaceState {
    amps: Vec<Complex64>,
    n_ground: usize,
}

impl TwoSurfaceState {
    pub fn zeros(n_ground: usize, n_excited: usize) -> Self {
        Self { amps: vec![ZERO; n_ground + n_excited], n_ground }
    }

    pub fn from_parts(ground: &[Complex64], excited: &[Complex64]) -> Self {
        let mut amps = ground.to_vec();
        amps.extend_from_slice(excited);
        Self { amps, n_ground: ground.len() }
    }

    /// `|phi^g_level>`
    pub fn ground_level(n_ground: usize, n_excited: usize, level: usize) -> Self {
        let mut s = Self::zeros(n_ground, n_excited);
        s.amps[level] = Complex64::new(1.0, 0.0);
        s
    }

    /// `|phi^e_level>`
    pub fn excited_level(n_ground: usize, n_excited: usize, level: usize) -> Self {
        let mut s = Self::zeros(n_ground, n_excited);
        s.amps[n_ground + level] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn n_ground(&self) -> usize {
        self.n_ground
    }

    pub fn n_excited(&self) -> usize {
        self.amps.len() - self.n_ground
    }

    pub fn ground(&self) -> &[Complex64] {
        &self.amps[..self.n_ground]
    }

    pub fn excited(&self) -> &[Complex64] {
        &self.amps[self.n_ground..]
    }

    pub fn ground_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps[..self.n_ground]
    }

    pub fn excited_mut(&mut self) -> &mut [Complex64] {
        let ng = self.n_ground;
        &mut self.amps[ng..]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn excited_population(&self) -> f64 {
        self.excited().iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.is_finite())
    }
}

/// Field-dependent two-surface Hamiltonian in the vibrational eigenbasis.
#[derive(Debug, Clone)]
pub struct TwoSurfaceHamiltonian {
    ground: Vec<f64>,
    /// `E^e + gap - omega_L`
    excited: Vec<f64>,
    /// `n_e x n_g`, row-major.
    eta: Vec<f64>,
    /// `n_g x n_e`, row-major.
    eta_t: Vec<f64>,
    /// Spectral norm of `eta`.
    eta_norm: f64,
}

impl TwoSurfaceHamiltonian {
    pub fn new(
        ground_energies: &[f64],
        excited_energies: &[f64],
        electronic_gap: f64,
        omega_l: f64,
        fc: &FranckCondonMap,
    ) -> Result<Self> {
        let (ng, ne) = (ground_energies.len(), excited_energies.len());
        if fc.n_ground() != ng || fc.n_excited() != ne {
            return Err(Error::config(format!(
                "{ng} ground / {ne} excited energies do not match the {}x{} Franck-Condon map",
                fc.n_excited(),
                fc.n_ground()
            )));
        }
        let eta_m = fc.eta();
        let eta: Vec<f64> = (0..ne).flat_map(|n| (0..ng).map(move |m| eta_m[(n, m)])).collect();
        let eta_t: Vec<f64> = (0..ng).flat_map(|m| (0..ne).map(move |n| eta_m[(n, m)])).collect();
        let eta_norm = if ng > 0 && ne > 0 {
            eta_m.clone().singular_values().max()
        } else {
            0.0
        };
        Ok(Self {
            ground: ground_energies.to_vec(),
            excited: excited_energies.iter().map(|e| e + electronic_gap - omega_l).collect(),
            eta,
            eta_t,
            eta_norm,
        })
    }

    pub fn n_ground(&self) -> usize {
        self.ground.len()
    }

    pub fn n_excited(&self) -> usize {
        self.excited.len()
    }

    pub fn ground_energies(&self) -> &[f64] {
        &self.ground
    }

    /// Diagonal of the excited block, carrier already subtracted.
    pub fn excited_diagonal(&self) -> &[f64] {
        &self.excited
    }

    pub fn eta(&self, excited: usize, ground: usize) -> f64 {
        self.eta[excited * self.ground.len() + ground]
    }

    /// Dense matrix at field `eps`.
    pub fn matrix(&self, eps: Complex64) -> DMatrix<Complex64> {
        let (ng, ne) = (self.n_ground(), self.n_excited());
        let mut h = DMatrix::from_element(ng + ne, ng + ne, ZERO);
        for m in 0..ng {
            h[(m, m)] = Complex64::new(self.ground[m], 0.0);
        }
        for n in 0..ne {
            h[(ng + n, ng + n)] = Complex64::new(self.excited[n], 0.0);
            for m in 0..ng {
                let c = 0.5 * self.eta(n, m);
                h[(ng + n, m)] = eps * c;
                h[(m, ng + n)] = eps.conj() * c;
            }
        }
        h
    }

    /// `out = scale * (H(eps) - center) v`
    fn apply_shifted(&self, eps: Complex64, center: f64, scale: f64, v: &[Complex64], out: &mut [Complex64]) {
        let ng = self.ground.len();
        let ne = self.excited.len();
        let half = 0.5 * eps;
        let half_c = half.conj();
        let (vg, ve) = v.split_at(ng);
        let (og, oe) = out.split_at_mut(ng);
        for m in 0..ng {
            let row = &self.eta_t[m * ne..(m + 1) * ne];
            let (mut re, mut im) = (0.0, 0.0);
            for (w, a) in row.iter().zip(ve) {
                re += w * a.re;
                im += w * a.im;
            }
            og[m] = ((self.ground[m] - center) * vg[m] + half_c * Complex64::new(re, im)) * scale;
        }
        for n in 0..ne {
            let row = &self.eta[n * ng..(n + 1) * ng];
            let (mut re, mut im) = (0.0, 0.0);
            for (w, a) in row.iter().zip(vg) {
                re += w * a.re;
                im += w * a.im;
            }
            oe[n] = ((self.excited[n] - center) * ve[n] + half * Complex64::new(re, im)) * scale;
        }
    }

    /// `H(eps) v`
    pub fn apply(&self, eps: Complex64, v: &TwoSurfaceState) -> TwoSurfaceState {
        let mut out = TwoSurfaceState::zeros(self.n_ground(), self.n_excited());
        self.apply_shifted(eps, 0.0, 1.0, &v.amps, &mut out.amps);
        out
    }

    /// Bounds on the spectrum of `H(eps)`.
    pub fn spectral_bounds(&self, eps: Complex64) -> (f64, f64) {
        let diag = self.ground.iter().chain(&self.excited);
        let lo = diag.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = diag.copied().fold(f64::NEG_INFINITY, f64::max);
        let c = 0.5 * eps.norm() * self.eta_norm;
        (lo - c, hi + c)
    }
}

/// Bessel functions `J_0(x) .. J_{k_max}(x)` for `x >= 0` by Miller's
/// downward recurrence, normalized with `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j_sequence(x: f64, k_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = {
        let s = (k_max as f64).max(x) + 30.0 + 10.0 * x.cbrt();
        let s = s.ceil() as usize;
        s + (s % 2)
    };
    let mut j_next = 0.0;
    let mut j_curr = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        // j_curr now holds J_{k-1}
        if k - 1 <= k_max {
            out[k - 1] = j_curr;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j_curr;
        }
        if j_curr.abs() > 1e250 {
            j_curr *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_curr;
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// `J_k(alpha)` up to the last order above tolerance, and the number of
/// terms kept.
fn chebyshev_coefficients(alpha: f64, opts: &PropagatorOptions) -> (Vec<f64>, usize) {
    let mut k_max = (alpha.ceil() as usize + 16).max(16);
    let mut coeffs = bessel_j_sequence(alpha, k_max);
    while coeffs[k_max].abs() >= opts.tolerance && k_max <= 4 * opts.max_terms {
        k_max *= 2;
        coeffs = bessel_j_sequence(alpha, k_max);
    }
    let n_terms = (0..=k_max)
        .rev()
        .find(|&k| coeffs[k].abs() >= opts.tolerance || (k as f64) <= alpha)
        .map_or(1, |k| k + 1);
    (coeffs, n_terms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    /// Magnitude below which Chebyshev coefficients are dropped.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self { tolerance: 1e-15, max_terms: 256 }
    }
}

/// Chebyshev stepper with its scratch buffers.
#[derive(Debug, Clone)]
pub struct Propagator<'h> {
    ham: &'h TwoSurfaceHamiltonian,
    opts: PropagatorOptions,
    bufs: [Vec<Complex64>; 4],
    coeffs: Vec<f64>,
}

impl<'h> Propagator<'h> {
    pub fn new(ham: &'h TwoSurfaceHamiltonian) -> Self {
        Self::with_options(ham, PropagatorOptions::default())
    }

    pub fn with_options(ham: &'h TwoSurfaceHamiltonian, opts: PropagatorOptions) -> Self {
        let dim = ham.n_ground() + ham.n_excited();
        Self {
            ham,
            opts,
            bufs: [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]],
            coeffs: Vec::new(),
        }
    }

    pub fn hamiltonian(&self) -> &'h TwoSurfaceHamiltonian {
        self.ham
    }

    /// Applies `exp(-i H(eps) dt)` in place. A negative `dt` propagates
    /// backward in time.
    pub fn step(&mut self, state: &mut TwoSurfaceState, eps: Complex64, dt: f64) -> Result<()> {
        let (lo, hi) = self.ham.spectral_bounds(eps);
        let center = 0.5 * (lo + hi);
        let half = (0.5 * (hi - lo)).max(1e-12);
        let alpha = half * dt.abs();

        let (coeffs, n_terms) = chebyshev_coefficients(alpha, &self.opts);
        if n_terms > self.opts.max_terms {
            let mut a = alpha;
            while chebyshev_coefficients(a, &self.opts).1 > self.opts.max_terms {
                a *= 0.5;
            }
            return Err(Error::StepSize {
                dt: dt.abs(),
                terms: n_terms,
                max_terms: self.opts.max_terms,
                suggested_dt: a / half,
            });
        }
        self.coeffs = coeffs;

        let sign = if dt < 0.0 { -1.0 } else { 1.0 };
        let scale = 1.0 / half;
        // c_k = (2 - delta_k0) (-i sign)^k J_k(alpha)
        let coef = |k: usize, j: f64| -> Complex64 {
            let m = if k == 0 { j } else { 2.0 * j };
            match k % 4 {
                0 => Complex64::new(m, 0.0),
                1 => Complex64::new(0.0, -sign * m),
                2 => Complex64::new(-m, 0.0),
                _ => Complex64::new(0.0, sign * m),
            }
        };

        let [prev, curr, next, acc] = &mut self.bufs;
        prev.copy_from_slice(&state.amps);
        let c0 = coef(0, self.coeffs[0]);
        for (a, p) in acc.iter_mut().zip(prev.iter()) {
            *a = c0 * p;
        }
        if n_terms > 1 {
            self.ham.apply_shifted(eps, center, scale, prev, curr);
            let c1 = coef(1, self.coeffs[1]);
            for (a, c) in acc.iter_mut().zip(curr.iter()) {
                *a += c1 * c;
            }
            for k in 2..n_terms {
                self.ham.apply_shifted(eps, center, 2.0 * scale, curr, next);
                let ck = coef(k, self.coeffs[k]);
                for ((nx, p), a) in next.iter_mut().zip(prev.iter()).zip(acc.iter_mut()) {
                    *nx -= p;
                    *a += ck * *nx;
                }
                std::mem::swap(prev, curr);
                std::mem::swap(curr, next);
            }
        }
        let phase = Complex64::from_polar(1.0, -center * dt);
        for (s, a) in state.amps.iter_mut().zip(acc.iter()) {
            *s = phase * a;
        }
        Ok(())
    }

    /// Propagates `initial` over the whole pulse and returns the final state.
    pub fn propagate(&mut self, initial: &TwoSurfaceState, pulse: &Pulse) -> Result<TwoSurfaceState> {
        self.check_shape(initial)?;
        let dt = pulse.grid().dt();
        let mut state = initial.clone();
        for k in 0..pulse.grid().n_steps() {
            self.step(&mut state, pulse.sample(k), dt)?;
            if !state.is_finite() {
                return Err(Error::NumericalBlowup { step: k });
            }
        }
        Ok(state)
    }

    fn check_shape(&self, s: &TwoSurfaceState) -> Result<()> {
        if s.n_ground() != self.ham.n_ground() || s.n_excited() != self.ham.n_excited() {
            return Err(Error::config(format!(
                "state has {}+{} levels, Hamiltonian {}+{}",
                s.n_ground(),
                s.n_excited(),
                self.ham.n_ground(),
                self.ham.n_excited()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// States along a propagation, stored at every `stride`-th time point (and
/// at both ends). Intermediate points are recovered by re-propagating from
/// the nearest checkpoint.
#[derive(Debug, Clone)]
pub struct Trajectory {
    direction: Direction,
    stride: usize,
    n_steps: usize,
    /// `checkpoints[c]` is the state at `t_{min(c * stride, n_steps)}`.
    checkpoints: Vec<TwoSurfaceState>,
    pulse: Pulse,
}

impl Trajectory {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn pulse(&self) -> &Pulse {
        &self.pulse
    }

    pub fn initial(&self) -> &TwoSurfaceState {
        &self.checkpoints[0]
    }

    pub fn final_state(&self) -> &TwoSurfaceState {
        self.checkpoints.last().expect("trajectory has at least two checkpoints")
    }

    fn checkpoint_index(&self, k: usize) -> usize {
        (k * self.stride).min(self.n_steps)
    }

    pub fn n_blocks(&self) -> usize {
        self.checkpoints.len() - 1
    }

    /// States at `t_k` for every `k` in block `b`, i.e. from checkpoint `b`
    /// to checkpoint `b + 1` inclusive.
    pub fn block(&self, prop: &mut Propagator, b: usize) -> Result<Vec<TwoSurfaceState>> {
        let k0 = self.checkpoint_index(b);
        let k1 = self.checkpoint_index(b + 1);
        let dt = self.pulse.grid().dt();
        let mut states = Vec::with_capacity(k1 - k0 + 1);
        match self.direction {
            Direction::Forward => {
                let mut s = self.checkpoints[b].clone();
                states.push(s.clone());
                for k in k0..k1 {
                    prop.step(&mut s, self.pulse.sample(k), dt)?;
                    states.push(s.clone());
                }
                // bit-identical endpoint with the stored checkpoint
                *states.last_mut().unwrap() = self.checkpoints[b + 1].clone();
            }
            Direction::Backward => {
                let mut s = self.checkpoints[b + 1].clone();
                states.push(s.clone());
                for k in (k0..k1).rev() {
                    prop.step(&mut s, self.pulse.sample(k), -dt)?;
                    states.push(s.clone());
                }
                *states.last_mut().unwrap() = self.checkpoints[b].clone();
                states.reverse();
            }
        }
        Ok(states)
    }

    /// State at `t_k`.
    pub fn state_at(&self, prop: &mut Propagator, k: usize) -> Result<TwoSurfaceState> {
        if k > self.n_steps {
            return Err(Error::config(format!("time index {k} beyond {} steps", self.n_steps)));
        }
        if k == self.n_steps {
            return Ok(self.final_state().clone());
        }
        let b = k / self.stride;
        if self.stride == 1 {
            return Ok(self.checkpoints[k].clone());
        }
        Ok(self.block(prop, b)?.swap_remove(k - b * self.stride))
    }

    /// Every state `t_0 .. t_N`, reconstructing as needed.
    pub fn all_states(&self, prop: &mut Propagator) -> Result<Vec<TwoSurfaceState>> {
        if self.stride == 1 {
            return Ok(self.checkpoints.clone());
        }
        let mut out = Vec::with_capacity(self.n_steps + 1);
        for b in 0..self.n_blocks() {
            let mut blk = self.block(prop, b)?;
            if b > 0 {
                blk.remove(0);
            }
            out.extend(blk);
        }
        Ok(out)
    }
}

/// Forward propagation from `t = 0`, keeping every `stride`-th state.
pub fn propagate_forward(
    prop: &mut Propagator,
    initial: &TwoSurfaceState,
    pulse: &Pulse,
    stride: usize,
) -> Result<Trajectory> {
    prop.check_shape(initial)?;
    let stride = stride.max(1);
    let n = pulse.grid().n_steps();
    let dt = pulse.grid().dt();
    let mut checkpoints = vec![initial.clone()];
    let mut s = initial.clone();
    for k in 0..n {
        prop.step(&mut s, pulse.sample(k), dt)?;
        if !s.is_finite() {
            return Err(Error::NumericalBlowup { step: k });
        }
        if (k + 1) % stride == 0 || k + 1 == n {
            checkpoints.push(s.clone());
        }
    }
    Ok(Trajectory { direction: Direction::Forward, stride, n_steps: n, checkpoints, pulse: pulse.clone() })
}

/// Backward propagation from `t = T` with `exp(+i H dt)`, as used for
/// costates.
pub fn propagate_backward(
    prop: &mut Propagator,
    final_state: &TwoSurfaceState,
    pulse: &Pulse,
    stride: usize,
) -> Result<Trajectory> {
    prop.check_shape(final_state)?;
    let stride = stride.max(1);
    let n = pulse.grid().n_steps();
    let dt = pulse.grid().dt();
    let n_cp = n.div_ceil(stride) + 1;
    let mut checkpoints = vec![final_state.clone(); n_cp];
    let mut s = final_state.clone();
    for k in (0..n).rev() {
        prop.step(&mut s, pulse.sample(k), -dt)?;
        if !s.is_finite() {
            return Err(Error::NumericalBlowup { step: k });
        }
        if k % stride == 0 {
            checkpoints[k / stride] = s.clone();
        }
    }
    Ok(Trajectory { direction: Direction::Backward, stride, n_steps: n, checkpoints, pulse: pulse.clone() })
}

/// Populations of every level along a trajectory, for debugging dumps.
pub fn populations_csv(times: &[f64], states: &[TwoSurfaceState], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str("# units: t in atomic time units, populations dimensionless\n");
    let Some(first) = states.first() else { return out };
    out.push('t');
    for m in 0..first.n_ground() {
        out.push_str(&format!(",g{m}"));
    }
    for n in 0..first.n_excited() {
        out.push_str(&format!(",e{n}"));
    }
    out.push('\n');
    for (t, s) in times.iter().zip(states) {
        out.push_str(&format!("{t:.16e}"));
        for a in s.amplitudes() {
            out.push_str(&format!(",{:.16e}", a.norm_sqr()));
        }
        out.push('\n');
    }
    out
}
