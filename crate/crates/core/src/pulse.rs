//! Complex pulse envelopes on a uniform time grid.
//!
//! A [`Pulse`] stores `n_steps + 1` samples `eps(t_k)`, `t_k = k dt`. Sample
//! `k < n_steps` is the (constant) field on the interval `[t_k, t_k + dt)`;
//! the last sample is the value at `t = T`, kept so that boundary conditions
//! imposed by a shape function are visible in the stored pulse.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::units::{
    au_to_fs, hartree_to_wavenumber, AU_FIELD_TO_V_PER_M, AU_TIME_TO_SECONDS, EPSILON_0,
    SPEED_OF_LIGHT,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::config(format!("final time must be positive (got {t_final})")));
        }
        if n_steps < 2 {
            return Err(Error::config(format!("need at least 2 time steps (got {n_steps})")));
        }
        Ok(Self { t_final, n_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_final
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }
}

/// `S(t)`: sin^2 switch-on over `[0, t_ramp]`, one in the middle, sin^2
/// switch-off over `[T - t_ramp, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFunction {
    t_ramp: f64,
    t_final: f64,
}

impl ShapeFunction {
    pub fn new(t_ramp: f64, t_final: f64) -> Result<Self> {
        if !(t_ramp > 0.0 && 2.0 * t_ramp <= t_final) {
            return Err(Error::config(format!(
                "ramp time must lie in (0, T/2] (got {t_ramp} for T = {t_final})"
            )));
        }
        Ok(Self { t_ramp, t_final })
    }

    /// Ramp of `T / 20`.
    pub fn default_for(grid: &TimeGrid) -> Self {
        Self { t_ramp: grid.t_final() / 20.0, t_final: grid.t_final() }
    }

    pub fn t_ramp(&self) -> f64 {
        self.t_ramp
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.t_final {
            0.0
        } else if t < self.t_ramp {
            (0.5 * PI * t / self.t_ramp).sin().powi(2)
        } else if t > self.t_final - self.t_ramp {
            (0.5 * PI * (self.t_final - t) / self.t_ramp).sin().powi(2)
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    grid: TimeGrid,
    envelope: Vec<Complex64>,
    omega_l: f64,
}

impl Pulse {
    pub fn new(grid: TimeGrid, envelope: Vec<Complex64>, omega_l: f64) -> Result<Self> {
        if envelope.len() != grid.n_steps() + 1 {
            return Err(Error::config(format!(
                "pulse has {} samples, expected {}",
                envelope.len(),
                grid.n_steps() + 1
            )));
        }
        if envelope.iter().any(|e| !e.is_finite()) {
            return Err(Error::config("pulse samples must be finite"));
        }
        Ok(Self { grid, envelope, omega_l })
    }

    pub fn zero(grid: TimeGrid, omega_l: f64) -> Self {
        Self { grid, envelope: vec![Complex64::new(0.0, 0.0); grid.n_steps() + 1], omega_l }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn omega_l(&self) -> f64 {
        self.omega_l
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub(crate) fn envelope_mut(&mut self) -> &mut [Complex64] {
        &mut self.envelope
    }

    /// Field applied during step `k`.
    pub fn sample(&self, k: usize) -> Complex64 {
        self.envelope[k]
    }

    /// Multiplies every sample by `S(t_k)`.
    pub fn shaped(mut self, shape: &ShapeFunction) -> Self {
        for (k, e) in self.envelope.iter_mut().enumerate() {
            *e *= shape.eval(self.grid.time(k));
        }
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for e in &mut self.envelope {
            *e *= factor;
        }
        self
    }

    /// `sum_k |eps_k|^2 dt` over the propagation intervals.
    pub fn fluence(&self) -> f64 {
        let n = self.grid.n_steps();
        self.envelope[..n].iter().map(|e| e.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.envelope.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// CSV with columns `t_fs, re, im, abs, phase`. The exact grid and carrier
    /// are recorded in `#` header lines so that [`Pulse::from_csv`] restores
    /// the pulse bit for bit.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str(&format!("# t_final_au = {:.16e}\n", self.grid.t_final()));
        out.push_str(&format!("# n_steps = {}\n", self.grid.n_steps()));
        out.push_str(&format!("# omega_l_au = {:.16e}\n", self.omega_l));
        out.push_str("# units: t in fs, field in atomic units (5.142e11 V/m), phase in rad\n");
        out.push_str("t_fs,re,im,abs,phase\n");
        for (k, e) in self.envelope.iter().enumerate() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                au_to_fs(self.grid.time(k)),
                e.re,
                e.im,
                e.norm(),
                e.arg()
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let perr = |message: String| Error::Parse { context: "pulse CSV".into(), message };
        let mut t_final = None;
        let mut n_steps = None;
        let mut omega_l = None;
        let mut env = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    match k.trim() {
                        "t_final_au" => t_final = v.trim().parse::<f64>().ok(),
                        "n_steps" => n_steps = v.trim().parse::<usize>().ok(),
                        "omega_l_au" => omega_l = v.trim().parse::<f64>().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with("t_fs") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(perr(format!("expected 5 columns, got {}", cols.len())));
            }
            let re: f64 = cols[1].trim().parse().map_err(|e| perr(format!("{e}")))?;
            let im: f64 = cols[2].trim().parse().map_err(|e| perr(format!("{e}")))?;
            env.push(Complex64::new(re, im));
        }
        let grid = TimeGrid::new(
            t_final.ok_or_else(|| perr("missing t_final_au header".into()))?,
            n_steps.ok_or_else(|| perr("missing n_steps header".into()))?,
        )?;
        Pulse::new(grid, env, omega_l.ok_or_else(|| perr("missing omega_l_au header".into()))?)
    }
}

/// `eps(t) = peak exp(-4 ln2 (t - center)^2 / fwhm^2) exp(i detuning t)`.
///
/// `fwhm` is the full width of `|eps|`; the intensity `|eps|^2` is narrower
/// by `sqrt 2`. Under the rotating-wave Hamiltonian a component
/// `exp(i d t)` drives transitions at `omega_l - d`.
pub fn gaussian_guess(
    grid: TimeGrid,
    center: f64,
    fwhm: f64,
    peak: f64,
    detuning: f64,
    omega_l: f64,
) -> Result<Pulse> {
    if !(center > 0.0 && center < grid.t_final()) {
        return Err(Error::config(format!("pulse center {center} outside (0, T)")));
    }
    if !(fwhm > 0.0) {
        return Err(Error::config("pulse FWHM must be positive"));
    }
    let envelope = grid
        .times()
        .into_iter()
        .map(|t| {
            let a = peak * (-4.0 * LN_2 * (t - center).powi(2) / (fwhm * fwhm)).exp();
            Complex64::from_polar(a, detuning * t)
        })
        .collect();
    Pulse::new(grid, envelope, omega_l)
}

/// Field FWHM of a transform-limited Gaussian whose intensity spectrum has
/// full width `spectral_fwhm` (angular frequency).
pub fn transform_limited_fwhm(spectral_fwhm: f64) -> f64 {
    // intensity widths obey dt * dw = 4 ln 2; the field is wider by sqrt 2
    4.0 * LN_2 / spectral_fwhm * 2.0_f64.sqrt()
}

/// Spectral intensity `|eps~(omega)|^2` on an ascending frequency axis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Angular frequency in Hartree, carrier included.
    pub omega: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Frequency spacing.
    pub d_omega: f64,
}

impl Spectrum {
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.omega.iter().map(|&w| hartree_to_wavenumber(w)).collect()
    }

    /// Index of the strongest component.
    pub fn peak_index(&self) -> usize {
        self.intensity
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
            .0
    }

    /// Full width at half maximum, linearly interpolated, in Hartree.
    pub fn fwhm(&self) -> f64 {
        let p = self.peak_index();
        let half = 0.5 * self.intensity[p];
        let cross = |range: &mut dyn Iterator<Item = usize>, step: isize| -> f64 {
            for i in range {
                let j = (i as isize + step) as usize;
                if self.intensity[j] < half {
                    let (x0, x1) = (self.omega[i], self.omega[j]);
                    let (y0, y1) = (self.intensity[i], self.intensity[j]);
                    return x0 + (half - y0) * (x1 - x0) / (y1 - y0);
                }
            }
            f64::NAN
        };
        let hi = cross(&mut (p..self.omega.len() - 1), 1);
        let lo = cross(&mut (1..=p).rev(), -1);
        hi - lo
    }

    /// CSV `wavenumber_cm-1, intensity`, intensity normalized to peak 1.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("# units: wavenumber in cm^-1, intensity normalized to its maximum\n");
        out.push_str("wavenumber_cm-1,intensity\n");
        let peak = self.intensity.iter().copied().fold(0.0, f64::max);
        let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        for (w, i) in self.wavenumbers().iter().zip(&self.intensity) {
            out.push_str(&format!("{:.16e},{:.16e}\n", w, i * scale));
        }
        out
    }
}

/// Discrete Fourier transform of all stored samples,
/// `eps~(d) = dt sum_k eps_k exp(-i d t_k)`, reported at `omega_l - d`.
pub fn spectrum(p: &Pulse) -> Spectrum {
    let m = p.envelope.len();
    let dt = p.grid.dt();
    let mut buf = p.envelope.clone();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let d_omega = 2.0 * PI / (m as f64 * dt);
    let mut rows: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let shift = if j <= (m - 1) / 2 { j as f64 } else { j as f64 - m as f64 };
            (p.omega_l - shift * d_omega, (f * dt).norm_sqr())
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Spectrum {
        omega: rows.iter().map(|r| r.0).collect(),
        intensity: rows.iter().map(|r| r.1).collect(),
        d_omega,
    }
}

/// Integrated pulse energy, or the bare fluence when no beam area is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseEnergy {
    Microjoule(f64),
    /// `integral |eps|^2 dt` in atomic units.
    FluenceAu(f64),
}

/// Pulse energy `(eps0 c / 2) * area * integral |eps|^2 dt` for a beam of
/// cross-section `beam_area` (m^2).
pub fn pulse_energy(p: &Pulse, beam_area: Option<f64>) -> Result<PulseEnergy> {
    let fluence = p.fluence();
    match beam_area {
        None => Ok(PulseEnergy::FluenceAu(fluence)),
        Some(a) if a > 0.0 => {
            let si = fluence * AU_FIELD_TO_V_PER_M * AU_FIELD_TO_V_PER_M * AU_TIME_TO_SECONDS;
            Ok(PulseEnergy::Microjoule(0.5 * EPSILON_0 * SPEED_OF_LIGHT * a * si * 1e6))
        }
        Some(a) => Err(Error::config(format!("beam area must be positive (got {a})"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{fs_to_au, wavenumber_to_hartree};

    fn grid() -> TimeGrid {
        TimeGrid::new(4000.0, 4000).unwrap()
    }

    #[test]
    fn time_grid_rules() {
        let g = TimeGrid::new(10.0, 4).unwrap();
        assert_eq!(g.dt(), 2.5);
        assert_eq!(g.times(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
    }

    #[test]
    fn shape_function_bounds() {
        let s = ShapeFunction::new(100.0, 1000.0).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1000.0), 0.0);
        assert_eq!(s.eval(100.0), 1.0);
        assert_eq!(s.eval(500.0), 1.0);
        assert!((s.eval(50.0) - 0.5).abs() < 1e-12);
        for k in 0..=1000 {
            let v = s.eval(k as f64);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(ShapeFunction::new(600.0, 1000.0).is_err());
    }

    #[test]
    fn zero_peak_is_zero_pulse() {
        let p = gaussian_guess(grid(), 2000.0, 300.0, 0.0, 0.01, 0.05).unwrap();
        assert!(p.envelope().iter().all(|e| e.norm() == 0.0));
        assert!(spectrum(&p).intensity.iter().all(|&x| x == 0.0));
        assert_eq!(pulse_energy(&p, Some(1e-10)).unwrap(), PulseEnergy::Microjoule(0.0));
    }

    #[test]
    fn unshifted_gaussian_is_real_and_peaks_at_center() {
        let p = gaussian_guess(grid(), 2000.0, 300.0, 0.01, 0.0, 0.05).unwrap();
        assert!(p.envelope().iter().all(|e| e.im == 0.0));
        let kmax = (0..p.envelope().len()).max_by(|&a, &b| p.sample(a).re.total_cmp(&p.sample(b).re)).unwrap();
        assert_eq!(p.grid().time(kmax), 2000.0);
        assert!(gaussian_guess(grid(), 0.0, 300.0, 0.01, 0.0, 0.05).is_err());
        assert!(gaussian_guess(grid(), 100.0, -3.0, 0.01, 0.0, 0.05).is_err());
    }

    #[test]
    fn spectrum_peaks_at_carrier_with_transform_limit() {
        let p = gaussian_guess(TimeGrid::new(40000.0, 8000).unwrap(), 20000.0, 600.0, 0.01, 0.0, 0.05).unwrap();
        let s = spectrum(&p);
        assert!((s.omega[s.peak_index()] - 0.05).abs() < 0.5 * s.d_omega);
        // intensity FWHM in time, measured from the samples
        let times = p.grid().times();
        let inten: Vec<f64> = p.envelope().iter().map(|e| e.norm_sqr()).collect();
        let time_spec = Spectrum { omega: times, intensity: inten, d_omega: p.grid().dt() };
        let product = time_spec.fwhm() * s.fwhm();
        assert!((product / (4.0 * LN_2) - 1.0).abs() < 0.01, "{product}");
        // unimodal
        let pk = s.peak_index();
        let floor = 1e-12 * s.intensity[pk];
        assert!(s.intensity[..pk].windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-9) || w[1] < floor));
        assert!(s.intensity[pk..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) || w[0] < floor));
    }

    #[test]
    fn detuning_moves_the_driven_frequency_down() {
        let p = gaussian_guess(TimeGrid::new(40000.0, 8000).unwrap(), 20000.0, 600.0, 0.01, 0.004, 0.05).unwrap();
        let s = spectrum(&p);
        assert!((s.omega[s.peak_index()] - 0.046).abs() < s.d_omega);
    }

    #[test]
    fn time_shift_leaves_intensity_spectrum_unchanged() {
        let a = spectrum(&gaussian_guess(grid(), 1500.0, 200.0, 0.01, 0.003, 0.05).unwrap());
        let b = spectrum(&gaussian_guess(grid(), 2500.0, 200.0, 0.01, 0.003, 0.05).unwrap());
        for (x, y) in a.intensity.iter().zip(&b.intensity) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval() {
        let p = gaussian_guess(grid(), 1800.0, 250.0, 0.02, 0.004, 0.05).unwrap();
        let s = spectrum(&p);
        let time_side: f64 = p.envelope().iter().map(|e| e.norm_sqr()).sum::<f64>() * p.grid().dt();
        let freq_side: f64 = s.intensity.iter().sum::<f64>() * s.d_omega / (2.0 * PI);
        assert!((time_side - freq_side).abs() < 1e-10);
    }

    #[test]
    fn thirty_femtosecond_pulse_spans_about_500_wavenumbers() {
        // transform-limited intensity FWHM of 30 fs
        let fwhm_field = fs_to_au(30.0) * 2.0_f64.sqrt();
        let g = TimeGrid::new(fs_to_au(2000.0), 16384).unwrap();
        let p = gaussian_guess(g, fs_to_au(1000.0), fwhm_field, 0.01, 0.0, 0.05).unwrap();
        let width = hartree_to_wavenumber(spectrum(&p).fwhm());
        assert!((width - 500.0).abs() < 25.0, "{width}");
        let back = transform_limited_fwhm(wavenumber_to_hartree(width));
        assert!((back / fwhm_field - 1.0).abs() < 0.01);
    }

    #[test]
    fn energy_scales_quadratically() {
        let a = gaussian_guess(grid(), 2000.0, 300.0, 0.01, 0.0, 0.05).unwrap();
        let b = gaussian_guess(grid(), 2000.0, 300.0, 0.02, 0.0, 0.05).unwrap();
        let area = 100e-12;
        let (PulseEnergy::Microjoule(ea), PulseEnergy::Microjoule(eb)) =
            (pulse_energy(&a, Some(area)).unwrap(), pulse_energy(&b, Some(area)).unwrap())
        else {
            panic!()
        };
        assert!((eb / ea - 4.0).abs() < 1e-12);
        assert!(matches!(pulse_energy(&a, None).unwrap(), PulseEnergy::FluenceAu(_)));
        assert!(pulse_energy(&a, Some(0.0)).is_err());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let p = gaussian_guess(TimeGrid::new(1234.567, 64).unwrap(), 600.0, 200.0, 0.0123, 0.0031, 0.0712)
            .unwrap()
            .shaped(&ShapeFunction::new(60.0, 1234.567).unwrap());
        let q = Pulse::from_csv(&p.to_csv(&["hash 0".into()])).unwrap();
        assert_eq!(p, q);
        assert_eq!(q.sample(0).norm(), 0.0);
        assert_eq!(q.sample(64).norm(), 0.0);
    }
}
