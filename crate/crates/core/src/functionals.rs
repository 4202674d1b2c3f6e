//! Final-time cost functionals for vibrational cooling and their gradients.
//!
//! Two multi-objective functionals are provided. The *symmetrized* variant
//! asks every ensemble level to be excited with equal efficiency; the
//! *assembly-line* variant excites only one level and moves the remaining
//! population down one vibrational quantum per cycle through Raman
//! transitions. Both include a dark-state term for the target level and a
//! leakage penalty for population leaving the cooling subspace.
//!
//! Gradients are taken with `<psi|` and `|psi>` as independent variables,
//! so that `grad <psi|X|psi> = X|psi>` and `grad Re<phi|psi> = |phi>/2`.

use num_complex::Complex64;

use crate::propagator::TwoSurfaceState;
use crate::quantum_core::FranckCondonMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Symmetrized,
    Assembly,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Symmetrized => "sym",
            Variant::Assembly => "ass",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sym" | "symmetrized" => Ok(Variant::Symmetrized),
            "ass" | "assembly" | "assembly-line" => Ok(Variant::Assembly),
            other => Err(Error::config(format!("unknown functional variant '{other}'"))),
        }
    }
}

/// How an overlap `<phi|psi>` enters a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapForm {
    SquareModulus,
    RealPart,
}

impl OverlapForm {
    pub fn as_str(self) -> &'static str {
        match self {
            OverlapForm::SquareModulus => "modulus",
            OverlapForm::RealPart => "real",
        }
    }

    fn value(self, z: Complex64) -> f64 {
        match self {
            OverlapForm::SquareModulus => z.norm_sqr(),
            OverlapForm::RealPart => z.re,
        }
    }

    /// `grad_<psi| g(<phi|psi>)` is `phi` times this factor.
    fn gradient_factor(self, z: Complex64) -> Complex64 {
        match self {
            OverlapForm::SquareModulus => z,
            OverlapForm::RealPart => Complex64::new(0.5, 0.0),
        }
    }
}

impl std::str::FromStr for OverlapForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "modulus" | "square-modulus" | "abs2" => Ok(OverlapForm::SquareModulus),
            "real" | "real-part" | "re" => Ok(OverlapForm::RealPart),
            other => Err(Error::config(format!("unknown overlap form '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalConfig {
    pub variant: Variant,
    /// Highest initially populated level; the ensemble is `0..=n_max`.
    pub n_max: usize,
    /// Reference level of the symmetrized balance term, or the single
    /// excited level of the assembly line.
    pub n_star: usize,
    pub lambda_ss: f64,
    pub lambda_leak: f64,
    pub lambda_yield: f64,
    pub lambda_sym: f64,
    pub lambda_ass: f64,
    pub ss_form: OverlapForm,
    pub ass_form: OverlapForm,
}

impl FunctionalConfig {
    pub fn symmetrized(n_max: usize) -> Self {
        Self {
            variant: Variant::Symmetrized,
            n_max,
            n_star: 1,
            lambda_ss: 2.0,
            lambda_leak: 1.0,
            lambda_yield: 0.4,
            lambda_sym: 1.0,
            lambda_ass: 0.0,
            ss_form: OverlapForm::SquareModulus,
            ass_form: OverlapForm::RealPart,
        }
    }

    pub fn assembly(n_max: usize) -> Self {
        Self {
            variant: Variant::Assembly,
            n_max,
            n_star: 1,
            lambda_ss: 1.0,
            lambda_leak: 1.0,
            lambda_yield: 1.0,
            lambda_sym: 0.0,
            lambda_ass: 1.0,
            ss_form: OverlapForm::SquareModulus,
            ass_form: OverlapForm::RealPart,
        }
    }

    pub fn default_for(variant: Variant, n_max: usize) -> Self {
        match variant {
            Variant::Symmetrized => Self::symmetrized(n_max),
            Variant::Assembly => Self::assembly(n_max),
        }
    }

    /// Weight of the balance term of the active variant.
    pub fn lambda_balance(&self) -> f64 {
        match self.variant {
            Variant::Symmetrized => self.lambda_sym,
            Variant::Assembly => self.lambda_ass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("lambda_ss", self.lambda_ss),
            ("lambda_leak", self.lambda_leak),
            ("lambda_yield", self.lambda_yield),
            ("lambda_sym", self.lambda_sym),
            ("lambda_ass", self.lambda_ass),
        ];
        for (name, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::config(format!("{name} must be a non-negative number, got {w}")));
            }
        }
        if self.lambda_ss + self.lambda_leak + self.lambda_yield + self.lambda_balance() <= 0.0 {
            return Err(Error::config("at least one functional weight must be positive"));
        }
        if self.n_max == 0 {
            if self.lambda_yield > 0.0 || self.lambda_balance() > 0.0 {
                return Err(Error::config("n_max = 0 leaves only the dark-state and leakage terms"));
            }
        } else if self.n_star < 1 || self.n_star > self.n_max {
            return Err(Error::config(format!("n_star = {} outside 1..={}", self.n_star, self.n_max)));
        }
        Ok(())
    }
}

/// Diagonal operators entering the functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetOperators {
    /// `D`: weight `|eta_{l0}|^2` of excited level `l`.
    pub decay: Vec<f64>,
    /// `L`: dipole strength of excited level `l` towards everything outside
    /// the cooling subspace, continuum included.
    pub leak: Vec<f64>,
    /// Ground levels `0..=n_max` lie inside the cooling subspace.
    pub n_max: usize,
    pub n_ground: usize,
}

impl TargetOperators {
    pub fn new(fc: &FranckCondonMap, n_max: usize) -> Result<Self> {
        if n_max >= fc.n_ground() {
            return Err(Error::config(format!(
                "n_max = {n_max} needs more than the {} retained ground levels",
                fc.n_ground()
            )));
        }
        let mu2 = fc.dipole() * fc.dipole();
        let eta = fc.eta();
        let decay = (0..fc.n_excited()).map(|l| eta[(l, 0)] * eta[(l, 0)]).collect();
        let leak = (0..fc.n_excited())
            .map(|l| {
                let inside: f64 = (0..=n_max).map(|m| eta[(l, m)] * eta[(l, m)]).sum();
                (mu2 - inside).max(0.0)
            })
            .collect();
        Ok(Self { decay, leak, n_max, n_ground: fc.n_ground() })
    }

    /// `<psi|D|psi>`
    pub fn sigma(&self, psi: &TwoSurfaceState) -> f64 {
        psi.excited().iter().zip(&self.decay).map(|(c, d)| d * c.norm_sqr()).sum()
    }

    /// `<psi|P_out + L|psi>`
    pub fn leakage(&self, psi: &TwoSurfaceState) -> f64 {
        let out: f64 = psi.ground()[self.n_max + 1..].iter().map(|c| c.norm_sqr()).sum();
        let exc: f64 = psi.excited().iter().zip(&self.leak).map(|(c, w)| w * c.norm_sqr()).sum();
        out + exc
    }

    pub fn max_decay(&self) -> f64 {
        self.decay.iter().copied().fold(0.0, f64::max)
    }

    fn check(&self, psi: &TwoSurfaceState) -> Result<()> {
        if psi.n_ground() != self.n_ground || psi.n_excited() != self.decay.len() {
            return Err(Error::config(format!(
                "state has {}+{} levels, operators {}+{}",
                psi.n_ground(),
                psi.n_excited(),
                self.n_ground,
                self.decay.len()
            )));
        }
        Ok(())
    }
}

/// Approximate time-averaged decay overlap into the target level.
pub fn sigma_approx(final_state: &TwoSurfaceState, ops: &TargetOperators) -> f64 {
    ops.sigma(final_state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaExact {
    pub value: f64,
    /// Some pair of distinct excited levels was degenerate.
    pub degenerate: bool,
}

/// Decay overlap averaged over `[T, T + lifetime]` including the
/// interference between excited levels.
pub fn sigma_exact(
    final_state: &TwoSurfaceState,
    fc: &FranckCondonMap,
    excited_energies: &[f64],
    lifetime: f64,
) -> Result<SigmaExact> {
    if !(lifetime > 0.0) {
        return Err(Error::Domain(format!("lifetime must be positive, got {lifetime}")));
    }
    let ne = fc.n_excited();
    if excited_energies.len() != ne || final_state.n_excited() != ne {
        return Err(Error::config("excited dimensions disagree"));
    }
    let eta = fc.eta();
    // a_n = eta_{n0} <phi_n|psi>
    let a: Vec<Complex64> = (0..ne).map(|n| final_state.excited()[n] * eta[(n, 0)]).collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut degenerate = false;
    for n in 0..ne {
        total += a[n].norm_sqr();
        for m in 0..ne {
            if m == n {
                continue;
            }
            let de = excited_energies[n] - excited_energies[m];
            let factor = if de == 0.0 {
                degenerate = true;
                Complex64::new(1.0, 0.0)
            } else {
                let x = de * lifetime;
                (Complex64::new(0.0, x).exp() - 1.0) / Complex64::new(0.0, x)
            };
            total += factor * a[n].conj() * a[m];
        }
    }
    Ok(SigmaExact { value: total.re, degenerate })
}

/// Values of all final-time terms for one set of final states.
#[derive(Debug, Clone, PartialEq)]
pub struct TermRecord {
    pub variant: Variant,
    pub j_ss: f64,
    pub j_leak: f64,
    /// `J_yield` (symmetrized) or the single-level yield (assembly).
    pub j_yield: f64,
    /// `J_sym` or `J_ass`.
    pub j_balance: f64,
    pub j_t: f64,
    /// `sigma_n` for every member `n = 0..=n_max`.
    pub sigma: Vec<f64>,
}

impl TermRecord {
    pub fn balance_name(&self) -> &'static str {
        match self.variant {
            Variant::Symmetrized => "J_sym",
            Variant::Assembly => "J_ass",
        }
    }
}

fn check_ensemble(final_states: &[TwoSurfaceState], cfg: &FunctionalConfig, ops: &TargetOperators) -> Result<()> {
    if final_states.len() != cfg.n_max + 1 {
        return Err(Error::config(format!(
            "expected {} ensemble members, got {}",
            cfg.n_max + 1,
            final_states.len()
        )));
    }
    if ops.n_max != cfg.n_max {
        return Err(Error::config("target operators built for a different n_max"));
    }
    for s in final_states {
        ops.check(s)?;
    }
    Ok(())
}

/// Evaluates every term for final states `psi_n(T)` started in `|phi^g_n>`.
pub fn eval_terms(final_states: &[TwoSurfaceState], cfg: &FunctionalConfig, ops: &TargetOperators) -> Result<TermRecord> {
    check_ensemble(final_states, cfg, ops)?;
    let n_max = cfg.n_max;
    let sigma: Vec<f64> = final_states.iter().map(|s| ops.sigma(s)).collect();
    let j_ss = 1.0 - cfg.ss_form.value(final_states[0].ground()[0]);
    let j_leak: f64 = final_states.iter().map(|s| ops.leakage(s)).sum();
    let (j_yield, j_balance) = match cfg.variant {
        Variant::Symmetrized => {
            let j_yield = 1.0 - sigma[1..].iter().sum::<f64>();
            let j_sym = if n_max == 0 {
                0.0
            } else {
                let s_star = sigma[cfg.n_star];
                (1..=n_max).filter(|&n| n != cfg.n_star).map(|n| (sigma[n] - s_star).powi(2)).sum()
            };
            (j_yield, j_sym)
        }
        Variant::Assembly => {
            let j_yield = if n_max == 0 { 1.0 } else { 1.0 - sigma[cfg.n_star] };
            let j_ass = if n_max < 2 {
                0.0
            } else {
                let s: f64 = (2..=n_max).map(|n| cfg.ass_form.value(final_states[n].ground()[n - 1])).sum();
                1.0 - s / (n_max - 1) as f64
            };
            (j_yield, j_ass)
        }
    };
    let j_t = cfg.lambda_ss * j_ss + cfg.lambda_leak * j_leak + cfg.lambda_yield * j_yield + cfg.lambda_balance() * j_balance;
    Ok(TermRecord { variant: cfg.variant, j_ss, j_leak, j_yield, j_balance, j_t, sigma })
}

/// Costates `chi_n(T) = grad_<psi_n| J_T`.
pub fn costate_boundary(
    final_states: &[TwoSurfaceState],
    cfg: &FunctionalConfig,
    ops: &TargetOperators,
) -> Result<Vec<TwoSurfaceState>> {
    check_ensemble(final_states, cfg, ops)?;
    let n_max = cfg.n_max;
    let sigma: Vec<f64> = final_states.iter().map(|s| ops.sigma(s)).collect();
    // coefficient of D|psi_n> per member
    let mut d_coef = vec![0.0; n_max + 1];
    match cfg.variant {
        Variant::Symmetrized => {
            for c in d_coef.iter_mut().skip(1) {
                *c -= cfg.lambda_yield;
            }
            if n_max > 0 {
                let s_star = sigma[cfg.n_star];
                let mut star = 0.0;
                for n in (1..=n_max).filter(|&n| n != cfg.n_star) {
                    d_coef[n] += cfg.lambda_sym * 2.0 * (sigma[n] - s_star);
                    star -= 2.0 * (sigma[n] - s_star);
                }
                d_coef[cfg.n_star] += cfg.lambda_sym * star;
            }
        }
        Variant::Assembly => {
            if n_max > 0 {
                d_coef[cfg.n_star] -= cfg.lambda_yield;
            }
        }
    }

    let mut out = Vec::with_capacity(n_max + 1);
    for (n, psi) in final_states.iter().enumerate() {
        let mut chi = TwoSurfaceState::zeros(psi.n_ground(), psi.n_excited());
        {
            let g = chi.ground_mut();
            for (m, c) in psi.ground().iter().enumerate().skip(n_max + 1) {
                g[m] = *c * cfg.lambda_leak;
            }
            if n == 0 {
                g[0] -= cfg.ss_form.gradient_factor(psi.ground()[0]) * cfg.lambda_ss;
            }
            if cfg.variant == Variant::Assembly && n >= 2 {
                let w = cfg.lambda_ass / (n_max - 1) as f64;
                g[n - 1] -= cfg.ass_form.gradient_factor(psi.ground()[n - 1]) * w;
            }
        }
        let e = chi.excited_mut();
        for (l, c) in psi.excited().iter().enumerate() {
            e[l] = *c * (cfg.lambda_leak * ops.leak[l] + d_coef[n] * ops.decay[l]);
        }
        out.push(chi);
    }
    Ok(out)
}

/// Convergence CSV header for a variant.
pub fn convergence_header(variant: Variant) -> String {
    let (y, b) = match variant {
        Variant::Symmetrized => ("J_yield", "J_sym"),
        Variant::Assembly => ("J_yield_star", "J_ass"),
    };
    format!("iteration,J_T,J_ss,J_leak,{y},{b},J_t")
}
