use std::path::Path;

use super::SpatialGrid;
use crate::units::{BOHR_TO_ANGSTROM, HARTREE_TO_EV, HARTREE_TO_WAVENUMBER};
use crate::{Error, Result};

/// Potential energy curve of one electronic surface, in Hartree as a
/// function of R in bohr.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `offset + d_e (1 - exp(-a (r - r_e)))^2`
    Morse { d_e: f64, a: f64, r_e: f64, offset: f64 },
    /// `offset + k (r - r_e)^2 / 2`
    Harmonic { k: f64, r_e: f64, offset: f64 },
    /// Natural cubic spline through tabulated samples.
    Tabulated(Spline),
}

impl Potential {
    pub fn morse(d_e: f64, a: f64, r_e: f64) -> Self {
        Potential::Morse { d_e, a, r_e, offset: 0.0 }
    }

    /// Harmonic well with angular frequency `omega` for a particle of `mass`.
    pub fn harmonic(omega: f64, mass: f64, r_e: f64) -> Self {
        Potential::Harmonic { k: mass * omega * omega, r_e, offset: 0.0 }
    }

    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(Potential::Tabulated(Spline::new(r, v)?))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Potential::Morse { d_e, a, r_e, offset } => {
                let x = 1.0 - (-a * (r - r_e)).exp();
                offset + d_e * x * x
            }
            Potential::Harmonic { k, r_e, offset } => offset + 0.5 * k * (r - r_e).powi(2),
            Potential::Tabulated(s) => s.eval(r),
        }
    }

    /// Checks the parameter invariants against the grid.
    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        match self {
            Potential::Morse { d_e, a, r_e, .. } => {
                if !(*d_e > 0.0 && *a > 0.0) {
                    return Err(Error::config("Morse potential needs d_e > 0 and a > 0"));
                }
                if !(*r_e > grid.r_min() && *r_e < grid.r_max()) {
                    return Err(Error::config(format!(
                        "Morse r_e = {r_e} outside the grid ({}, {})",
                        grid.r_min(),
                        grid.r_max()
                    )));
                }
            }
            Potential::Harmonic { k, r_e, .. } => {
                if !(*k > 0.0) || !(*r_e > grid.r_min() && *r_e < grid.r_max()) {
                    return Err(Error::config(
                        "harmonic potential needs k > 0 and r_e inside the grid",
                    ));
                }
            }
            Potential::Tabulated(s) => {
                let (lo, hi) = s.range();
                // allow round-off at the ends
                let slack = 1e-9 * (hi - lo);
                if lo > grid.r_min() + slack || hi < grid.r_max() - slack {
                    return Err(Error::config(format!(
                        "tabulated potential covers [{lo}, {hi}] but the grid spans [{}, {}]",
                        grid.r_min(),
                        grid.r_max()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Samples the potential on every grid point.
    pub fn sample(&self, grid: &SpatialGrid) -> Result<Vec<f64>> {
        self.validate(grid)?;
        let v: Vec<f64> = grid.points().into_iter().map(|r| self.eval(r)).collect();
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::config(format!(
                "potential is not finite at r = {}",
                grid.point(i)
            )));
        }
        Ok(v)
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

impl Spline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::config("tabulated potential needs at least 4 (r, V) pairs"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("tabulated r values must be strictly increasing"));
        }
        // tridiagonal solve for second derivatives, natural end conditions
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        y2[n - 1] = 0.0;
        for k in (0..n - 1).rev() {
            y2[k] = y2[k] * y2[k + 1] + u[k];
        }
        Ok(Self { x, y, y2 })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.x.len();
        let hi = self.x.partition_point(|&xi| xi < r).clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.x[hi] - self.x[lo];
        let a = (self.x[hi] - r) / h;
        let b = (r - self.x[lo]) / h;
        a * self.y[lo]
            + b * self.y[hi]
            + ((a * a * a - a) * self.y2[lo] + (b * b * b - b) * self.y2[hi]) * h * h / 6.0
    }
}

/// Parses a two-column `r  V` table. Lines starting with `#` are comments;
/// a comment of the form `# units: <length> <energy>` selects the input
/// units (`a0`/`bohr`/`angstrom` and `hartree`/`cm-1`/`ev`). The default is
/// bohr and Hartree.
pub fn parse_tabulated(text: &str) -> Result<Potential> {
    let mut r_scale = 1.0;
    let mut e_scale = 1.0;
    let mut r = Vec::new();
    let mut v = Vec::new();
    let err = |line: usize, message: String| Error::Parse {
        context: format!("tabulated potential, line {line}"),
        message,
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(spec) = comment.trim().strip_prefix("units:") {
                let mut it = spec.split_whitespace();
                r_scale = match it.next().map(str::to_ascii_lowercase).as_deref() {
                    Some("a0") | Some("bohr") => 1.0,
                    Some("angstrom") | Some("a") => 1.0 / BOHR_TO_ANGSTROM,
                    other => return Err(err(idx + 1, format!("unknown length unit {other:?}"))),
                };
                e_scale = match it.next().map(str::to_ascii_lowercase).as_deref() {
                    Some("hartree") | Some("au") => 1.0,
                    Some("cm-1") => 1.0 / HARTREE_TO_WAVENUMBER,
                    Some("ev") => 1.0 / HARTREE_TO_EV,
                    other => return Err(err(idx + 1, format!("unknown energy unit {other:?}"))),
                };
            }
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if cols.len() != 2 {
            return Err(err(idx + 1, format!("expected two columns, found {}", cols.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| err(idx + 1, format!("{s:?}: {e}")));
        r.push(parse(cols[0])? * r_scale);
        v.push(parse(cols[1])? * e_scale);
    }
    Potential::tabulated(r, v)
}

pub fn load_tabulated(path: impl AsRef<Path>) -> Result<Potential> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_tabulated(&text)
}
