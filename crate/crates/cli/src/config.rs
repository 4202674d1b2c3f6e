//! Run configuration: a sectioned `key = value` text format with units.
//!
//! ```text
//! # comments start with '#'
//! [system]
//! preset = compact-parabola
//!
//! [pulse]
//! fwhm = 30 fs
//! ```
//!
//! Every dimensional value takes a unit suffix; a bare number is read in
//! atomic units. Accepted units:
//!
//! | quantity  | units                                   |
//! |-----------|-----------------------------------------|
//! | energy    | `hartree`/`eh`/`au`, `cm-1`, `ev`       |
//! | length    | `bohr`/`a0`/`au`, `angstrom`/`a`        |
//! | time      | `au`, `fs`, `ps`, `ns`                  |
//! | mass      | `me`/`au`, `amu`/`u`/`da`               |
//! | dipole    | `au`/`ea0`, `debye`/`d`                 |
//! | field     | `au`, `v/m`                             |
//! | inverse length | `1/bohr`/`au`, `1/angstrom`        |
//! | force constant | `hartree/bohr2`/`au`               |
//! | area      | `um2`, `cm2`, `m2`                      |
//!
//! Conversion constants are those of [`vibcool::units`]. Serialization
//! writes atomic units with shortest round-trip formatting, so a parsed and
//! re-serialized file parses back to an identical configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use vibcool::functionals::{FunctionalConfig, OverlapForm, Variant};
use vibcool::krotov::KrotovOptions;
use vibcool::presets::{self, GuessPulse, Preset};
use vibcool::pulse::ShapeFunction;
use vibcool::quantum_core::{load_tabulated, Potential, SpatialGrid};
use vibcool::system::SystemSpec;
use vibcool::units;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, key '{key}': {message}")]
    Key { line: usize, key: String, message: String },
    #[error("missing required key '{section}.{key}'")]
    Missing { section: String, key: String },
    #[error("{0}")]
    Invalid(String),
}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    Morse { d_e: f64, a: f64, r_e: f64 },
    /// Force constant `k` in Hartree / bohr^2.
    Harmonic { k: f64, r_e: f64 },
    Tabulated { path: PathBuf },
}

impl PotentialConfig {
    fn from_potential(p: &Potential) -> Self {
        match p {
            Potential::Morse { d_e, a, r_e, .. } => Self::Morse { d_e: *d_e, a: *a, r_e: *r_e },
            Potential::Harmonic { k, r_e, .. } => Self::Harmonic { k: *k, r_e: *r_e },
            Potential::Tabulated(_) => unreachable!("presets use analytic potentials"),
        }
    }

    pub fn build(&self) -> vibcool::Result<Potential> {
        Ok(match self {
            Self::Morse { d_e, a, r_e } => Potential::morse(*d_e, *a, *r_e),
            Self::Harmonic { k, r_e } => Potential::Harmonic { k: *k, r_e: *r_e, offset: 0.0 },
            Self::Tabulated { path } => load_tabulated(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub preset: Option<String>,
    pub mass: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub electronic_gap: f64,
    pub dipole: f64,
    pub n_ground: Option<usize>,
    pub n_excited: Option<usize>,
    pub lifetime: Option<f64>,
    pub ground: PotentialConfig,
    pub excited: PotentialConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Carrier {
    Line { ground: usize, excited: usize },
    Frequency(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub t_final: f64,
    pub n_steps: usize,
    pub center: f64,
    pub fwhm: f64,
    pub peak: f64,
    pub detuning: f64,
    pub carrier: Carrier,
    pub t_ramp: Option<f64>,
    /// m^2; `None` reports fluence in atomic units instead of energy.
    pub beam_area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSection {
    pub variant: Variant,
    pub n_max: usize,
    pub n_star: usize,
    pub lambda_ss: Option<f64>,
    pub lambda_leak: Option<f64>,
    pub lambda_yield: Option<f64>,
    pub lambda_sym: Option<f64>,
    pub lambda_ass: Option<f64>,
    pub ss_form: Option<OverlapForm>,
    pub ass_form: Option<OverlapForm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrotovSection {
    /// Step-size parameter; the preset's value for the variant when absent.
    pub lambda: Option<f64>,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub tol_mono: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseSource {
    Guess,
    Optimized,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingSection {
    pub initial_first: usize,
    pub initial_last: usize,
    pub n_cycles: usize,
    pub pulse: PulseSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub trajectories: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub pulse: PulseConfig,
    pub functional: FunctionalSection,
    pub krotov: KrotovSection,
    pub cooling: CoolingSection,
    pub output: OutputSection,
}

/// Default beam area (m^2) for pulse energies: 100 um^2.
pub const DEFAULT_BEAM_AREA: f64 = 100e-12;

// ---------------------------------------------------------------- units

#[derive(Debug, Clone, Copy)]
enum Quantity {
    Energy,
    Length,
    InverseLength,
    Time,
    Mass,
    Dipole,
    Field,
    ForceConstant,
    Area,
    Count,
}

fn unit_factor(q: Quantity, unit: &str) -> Option<f64> {
    let u = unit.to_ascii_lowercase();
    let u = u.as_str();
    Some(match (q, u) {
        (_, "") => 1.0,
        (Quantity::Energy, "hartree" | "eh" | "au") => 1.0,
        (Quantity::Energy, "cm-1" | "cm^-1" | "1/cm") => 1.0 / units::HARTREE_TO_WAVENUMBER,
        (Quantity::Energy, "ev") => 1.0 / units::HARTREE_TO_EV,
        (Quantity::Length, "bohr" | "a0" | "au") => 1.0,
        (Quantity::Length, "angstrom" | "a" | "å") => 1.0 / units::BOHR_TO_ANGSTROM,
        (Quantity::InverseLength, "1/bohr" | "1/a0" | "au") => 1.0,
        (Quantity::InverseLength, "1/angstrom" | "1/a") => units::BOHR_TO_ANGSTROM,
        (Quantity::Time, "au") => 1.0,
        (Quantity::Time, "fs") => 1.0 / units::AU_TIME_TO_FS,
        (Quantity::Time, "ps") => 1e3 / units::AU_TIME_TO_FS,
        (Quantity::Time, "ns") => 1e6 / units::AU_TIME_TO_FS,
        (Quantity::Mass, "me" | "au") => 1.0,
        (Quantity::Mass, "amu" | "u" | "da") => units::AMU_TO_ELECTRON_MASS,
        (Quantity::Dipole, "au" | "ea0") => 1.0,
        (Quantity::Dipole, "debye" | "d") => units::DEBYE_TO_AU,
        (Quantity::Field, "au") => 1.0,
        (Quantity::Field, "v/m") => 1.0 / units::AU_FIELD_TO_V_PER_M,
        (Quantity::ForceConstant, "hartree/bohr2" | "au") => 1.0,
        (Quantity::Area, "m2") => 1.0,
        (Quantity::Area, "cm2") => 1e-4,
        (Quantity::Area, "um2") => 1e-12,
        _ => return None,
    })
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

const KNOWN: &[(&str, &[&str])] = &[
    (
        "system",
        &[
            "preset", "mass", "r_min", "r_max", "n_points", "electronic_gap", "dipole", "n_ground", "n_excited",
            "lifetime",
        ],
    ),
    ("ground", &["kind", "d_e", "a", "r_e", "omega", "k", "file"]),
    ("excited", &["kind", "d_e", "a", "r_e", "omega", "k", "file"]),
    (
        "pulse",
        &[
            "t_final", "n_steps", "center", "fwhm", "peak", "detuning", "carrier", "carrier_ground",
            "carrier_excited", "t_ramp", "beam_area",
        ],
    ),
    (
        "functional",
        &[
            "variant", "n_max", "n_star", "lambda_ss", "lambda_leak", "lambda_yield", "lambda_sym", "lambda_ass",
            "ss_form", "ass_form",
        ],
    ),
    ("krotov", &["lambda", "max_iterations", "tolerance", "tol_mono", "stride"]),
    ("cooling", &["initial_first", "initial_last", "n_cycles", "pulse"]),
    ("output", &["dir", "trajectories"]),
];

fn tokenize(text: &str) -> CResult<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, message: format!("malformed section header '{content}'") })?
                .trim()
                .to_ascii_lowercase();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::Syntax { line, message: format!("unknown section [{name}]") });
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected 'key = value', got '{content}'") })?;
        let key = key.trim().to_ascii_lowercase();
        let section = current
            .clone()
            .ok_or_else(|| ConfigError::Key { line, key: key.clone(), message: "key outside any section".into() })?;
        let allowed = KNOWN.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(ConfigError::Key { line, key, message: format!("unknown key in [{section}]") });
        }
        let map = sections.get_mut(&section).expect("section registered");
        if let Some(prev) = map.get(&key) {
            return Err(ConfigError::Key { line, key, message: format!("duplicate key (first set on line {})", prev.line) });
        }
        map.insert(key, Entry { line, value: value.trim().to_string() });
    }
    Ok(sections)
}

struct Reader<'a> {
    sections: &'a Sections,
}

impl<'a> Reader<'a> {
    fn entry(&self, section: &str, key: &str) -> Option<&'a Entry> {
        self.sections.get(section).and_then(|m| m.get(key))
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn err(e: &Entry, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Key { line: e.line, key: key.to_string(), message: message.into() }
    }

    fn quantity(&self, section: &str, key: &str, q: Quantity) -> CResult<Option<f64>> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        let mut parts = e.value.split_whitespace();
        let num = parts.next().ok_or_else(|| Self::err(e, key, "empty value"))?;
        let unit: String = parts.collect::<Vec<_>>().join("");
        let x: f64 = num.parse().map_err(|_| Self::err(e, key, format!("'{num}' is not a number")))?;
        if !x.is_finite() {
            return Err(Self::err(e, key, "value must be finite"));
        }
        let f = unit_factor(q, &unit).ok_or_else(|| Self::err(e, key, format!("unit '{unit}' does not fit a {q:?} value")))?;
        Ok(Some(x * f))
    }

    fn positive(&self, section: &str, key: &str, q: Quantity) -> CResult<Option<f64>> {
        let v = self.quantity(section, key, q)?;
        if let (Some(x), Some(e)) = (v, self.entry(section, key)) {
            if x <= 0.0 {
                return Err(Self::err(e, key, "must be positive"));
            }
        }
        Ok(v)
    }

    fn non_negative(&self, section: &str, key: &str) -> CResult<Option<f64>> {
        let v = self.quantity(section, key, Quantity::Count)?;
        if let (Some(x), Some(e)) = (v, self.entry(section, key)) {
            if x < 0.0 {
                return Err(Self::err(e, key, "must be non-negative"));
            }
        }
        Ok(v)
    }

    fn integer(&self, section: &str, key: &str) -> CResult<Option<usize>> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        e.value.parse().map(Some).map_err(|_| Self::err(e, key, format!("'{}' is not a non-negative integer", e.value)))
    }

    fn string(&self, section: &str, key: &str) -> Option<&'a str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> CResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        e.value.parse().map(Some).map_err(|err: T::Err| Self::err(e, key, err.to_string()))
    }

    fn boolean(&self, section: &str, key: &str) -> CResult<Option<bool>> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        match e.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(Some(true)),
            "false" | "no" | "off" | "0" => Ok(Some(false)),
            other => Err(Self::err(e, key, format!("'{other}' is not a boolean"))),
        }
    }
}

fn required<T>(v: Option<T>, section: &str, key: &str) -> CResult<T> {
    v.ok_or_else(|| ConfigError::Missing { section: section.into(), key: key.into() })
}

fn parse_potential(
    r: &Reader,
    section: &str,
    base: Option<&PotentialConfig>,
    mass: f64,
    dir: &Path,
) -> CResult<PotentialConfig> {
    if !r.has_section(section) {
        return base.cloned().ok_or_else(|| ConfigError::Missing { section: section.into(), key: "kind".into() });
    }
    let kind = match r.string(section, "kind") {
        Some(k) => k.to_ascii_lowercase(),
        None => match base {
            Some(PotentialConfig::Morse { .. }) => "morse".into(),
            Some(PotentialConfig::Harmonic { .. }) => "harmonic".into(),
            Some(PotentialConfig::Tabulated { .. }) => "tabulated".into(),
            None => return Err(ConfigError::Missing { section: section.into(), key: "kind".into() }),
        },
    };
    match kind.as_str() {
        "morse" => {
            let (bd, ba, br) = match base {
                Some(PotentialConfig::Morse { d_e, a, r_e }) => (Some(*d_e), Some(*a), Some(*r_e)),
                _ => (None, None, None),
            };
            Ok(PotentialConfig::Morse {
                d_e: required(r.positive(section, "d_e", Quantity::Energy)?.or(bd), section, "d_e")?,
                a: required(r.positive(section, "a", Quantity::InverseLength)?.or(ba), section, "a")?,
                r_e: required(r.positive(section, "r_e", Quantity::Length)?.or(br), section, "r_e")?,
            })
        }
        "harmonic" => {
            let (bk, br) = match base {
                Some(PotentialConfig::Harmonic { k, r_e }) => (Some(*k), Some(*r_e)),
                _ => (None, None),
            };
            let k = match (r.positive(section, "k", Quantity::ForceConstant)?, r.positive(section, "omega", Quantity::Energy)?) {
                (Some(_), Some(_)) => {
                    let e = r.entry(section, "omega").expect("present");
                    return Err(Reader::err(e, "omega", "give either 'k' or 'omega', not both"));
                }
                (Some(k), None) => Some(k),
                (None, Some(w)) => Some(mass * w * w),
                (None, None) => bk,
            };
            Ok(PotentialConfig::Harmonic {
                k: required(k, section, "k")?,
                r_e: required(r.positive(section, "r_e", Quantity::Length)?.or(br), section, "r_e")?,
            })
        }
        "tabulated" => {
            let file = r.string(section, "file").map(PathBuf::from);
            let path = match (file, base) {
                (Some(p), _) if p.is_relative() => dir.join(p),
                (Some(p), _) => p,
                (None, Some(PotentialConfig::Tabulated { path })) => path.clone(),
                (None, _) => return Err(ConfigError::Missing { section: section.into(), key: "file".into() }),
            };
            Ok(PotentialConfig::Tabulated { path })
        }
        other => {
            let e = r.entry(section, "kind").expect("kind given");
            Err(Reader::err(e, "kind", format!("unknown potential kind '{other}' (morse, harmonic, tabulated)")))
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses config text; relative file paths resolve against `dir`.
    pub fn parse_str(text: &str, dir: &Path) -> CResult<Self> {
        let sections = tokenize(text)?;
        let r = Reader { sections: &sections };
        let preset: Option<Preset> = match r.entry("system", "preset") {
            Some(e) => Some(presets::preset(&e.value).map_err(|err| Reader::err(e, "preset", err.to_string()))?),
            None => None,
        };
        let ps = preset.as_ref().map(|p| &p.system);

        let mass = required(r.positive("system", "mass", Quantity::Mass)?.or(ps.map(|s| s.mass)), "system", "mass")?;
        let base_ground = ps.map(|s| PotentialConfig::from_potential(&s.ground));
        let base_excited = ps.map(|s| PotentialConfig::from_potential(&s.excited));
        let ground = parse_potential(&r, "ground", base_ground.as_ref(), mass, dir)?;
        let excited = parse_potential(&r, "excited", base_excited.as_ref(), mass, dir)?;
        let system = SystemConfig {
            preset: preset.as_ref().map(|p| p.name.to_string()),
            mass,
            r_min: required(r.quantity("system", "r_min", Quantity::Length)?.or(ps.map(|s| s.grid.r_min())), "system", "r_min")?,
            r_max: required(r.quantity("system", "r_max", Quantity::Length)?.or(ps.map(|s| s.grid.r_max())), "system", "r_max")?,
            n_points: required(r.integer("system", "n_points")?.or(ps.map(|s| s.grid.len())), "system", "n_points")?,
            electronic_gap: required(
                r.positive("system", "electronic_gap", Quantity::Energy)?.or(ps.map(|s| s.electronic_gap)),
                "system",
                "electronic_gap",
            )?,
            dipole: r.quantity("system", "dipole", Quantity::Dipole)?.or(ps.map(|s| s.dipole)).unwrap_or(1.0),
            n_ground: r.integer("system", "n_ground")?.or(ps.and_then(|s| s.n_ground)),
            n_excited: r.integer("system", "n_excited")?.or(ps.and_then(|s| s.n_excited)),
            lifetime: r.positive("system", "lifetime", Quantity::Time)?.or(ps.and_then(|s| s.lifetime)),
            ground,
            excited,
        };

        let pp: Option<&GuessPulse> = preset.as_ref().map(|p| &p.pulse);
        let t_final = required(r.positive("pulse", "t_final", Quantity::Time)?.or(pp.map(|p| p.t_final)), "pulse", "t_final")?;
        let carrier = match (
            r.quantity("pulse", "carrier", Quantity::Energy)?,
            r.integer("pulse", "carrier_ground")?,
            r.integer("pulse", "carrier_excited")?,
        ) {
            (Some(w), None, None) => Carrier::Frequency(w),
            (None, Some(g), Some(e)) => Carrier::Line { ground: g, excited: e },
            (None, None, None) => match pp {
                Some(p) => Carrier::Line { ground: p.carrier_line.0, excited: p.carrier_line.1 },
                None => return Err(ConfigError::Missing { section: "pulse".into(), key: "carrier".into() }),
            },
            _ => {
                return Err(ConfigError::Invalid(
                    "pulse: give either 'carrier' or both 'carrier_ground' and 'carrier_excited'".into(),
                ))
            }
        };
        let pulse = PulseConfig {
            t_final,
            n_steps: required(r.integer("pulse", "n_steps")?.or(pp.map(|p| p.n_steps)), "pulse", "n_steps")?,
            center: r.quantity("pulse", "center", Quantity::Time)?.or(pp.map(|p| p.center)).unwrap_or(0.5 * t_final),
            fwhm: required(r.positive("pulse", "fwhm", Quantity::Time)?.or(pp.map(|p| p.fwhm)), "pulse", "fwhm")?,
            peak: required(r.quantity("pulse", "peak", Quantity::Field)?.or(pp.map(|p| p.peak)), "pulse", "peak")?,
            detuning: r.quantity("pulse", "detuning", Quantity::Energy)?.or(pp.map(|p| p.detuning)).unwrap_or(0.0),
            carrier,
            t_ramp: r.positive("pulse", "t_ramp", Quantity::Time)?.or(pp.and_then(|p| p.t_ramp)),
            beam_area: match r.string("pulse", "beam_area") {
                Some(v) if v.eq_ignore_ascii_case("none") => None,
                _ => Some(r.positive("pulse", "beam_area", Quantity::Area)?.unwrap_or(DEFAULT_BEAM_AREA)),
            },
        };

        let variant: Variant = r.parsed("functional", "variant")?.unwrap_or(Variant::Assembly);
        let functional = FunctionalSection {
            variant,
            n_max: required(r.integer("functional", "n_max")?.or(preset.as_ref().map(|p| p.n_max)), "functional", "n_max")?,
            n_star: r.integer("functional", "n_star")?.unwrap_or(1),
            lambda_ss: r.non_negative("functional", "lambda_ss")?,
            lambda_leak: r.non_negative("functional", "lambda_leak")?,
            lambda_yield: r.non_negative("functional", "lambda_yield")?,
            lambda_sym: r.non_negative("functional", "lambda_sym")?,
            lambda_ass: r.non_negative("functional", "lambda_ass")?,
            ss_form: r.parsed("functional", "ss_form")?,
            ass_form: r.parsed("functional", "ass_form")?,
        };

        let krotov = KrotovSection {
            lambda: r.positive("krotov", "lambda", Quantity::Count)?,
            max_iterations: r.integer("krotov", "max_iterations")?.unwrap_or(1000),
            tolerance: r.non_negative("krotov", "tolerance")?.unwrap_or(1e-10),
            tol_mono: r.non_negative("krotov", "tol_mono")?.unwrap_or(1e-10),
            stride: r.integer("krotov", "stride")?.unwrap_or(1),
        };
        let krotov = KrotovSection {
            lambda: krotov.lambda.or(preset.as_ref().map(|p| p.lambda(variant))),
            ..krotov
        };

        let cooling = CoolingSection {
            initial_first: r.integer("cooling", "initial_first")?.unwrap_or(1),
            initial_last: r.integer("cooling", "initial_last")?.unwrap_or(10),
            n_cycles: r.integer("cooling", "n_cycles")?.unwrap_or(200),
            pulse: match r.string("cooling", "pulse") {
                None => PulseSource::Optimized,
                Some(s) if s.eq_ignore_ascii_case("optimized") => PulseSource::Optimized,
                Some(s) if s.eq_ignore_ascii_case("guess") => PulseSource::Guess,
                Some(s) if Path::new(s).is_relative() => PulseSource::File(dir.join(s)),
                Some(s) => PulseSource::File(PathBuf::from(s)),
            },
        };
        let output = OutputSection {
            dir: match r.string("output", "dir") {
                Some(s) if Path::new(s).is_relative() => dir.join(s),
                Some(s) => PathBuf::from(s),
                None => dir.join("vibcool-out"),
            },
            trajectories: r.boolean("output", "trajectories")?.unwrap_or(false),
        };

        let cfg = RunConfig { system, pulse, functional, krotov, cooling, output };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CResult<()> {
        let inv = |m: String| Err(ConfigError::Invalid(m));
        if self.system.r_min >= self.system.r_max {
            return inv(format!("system: r_min {} must be below r_max {}", self.system.r_min, self.system.r_max));
        }
        SpatialGrid::new(self.system.r_min, self.system.r_max, self.system.n_points)
            .map_err(|e| ConfigError::Invalid(format!("system: {e}")))?;
        if self.pulse.n_steps < 2 {
            return inv("pulse: n_steps must be at least 2".into());
        }
        if !(self.pulse.center > 0.0 && self.pulse.center < self.pulse.t_final) {
            return inv("pulse: center must lie inside (0, t_final)".into());
        }
        if let Carrier::Frequency(w) = self.pulse.carrier {
            if w <= 0.0 {
                return inv("pulse: carrier must be positive".into());
            }
        }
        self.functional_config().validate().map_err(|e| ConfigError::Invalid(format!("functional: {e}")))?;
        if self.krotov.lambda.is_none() {
            return Err(ConfigError::Missing { section: "krotov".into(), key: "lambda".into() });
        }
        self.krotov_options().map_err(|e| ConfigError::Invalid(format!("krotov: {e}")))?;
        if self.cooling.initial_first > self.cooling.initial_last {
            return inv("cooling: initial_first must not exceed initial_last".into());
        }
        Ok(())
    }

    pub fn functional_config(&self) -> FunctionalConfig {
        let f = &self.functional;
        let d = FunctionalConfig::default_for(f.variant, f.n_max);
        FunctionalConfig {
            variant: f.variant,
            n_max: f.n_max,
            n_star: f.n_star,
            lambda_ss: f.lambda_ss.unwrap_or(d.lambda_ss),
            lambda_leak: f.lambda_leak.unwrap_or(d.lambda_leak),
            lambda_yield: f.lambda_yield.unwrap_or(d.lambda_yield),
            lambda_sym: f.lambda_sym.unwrap_or(d.lambda_sym),
            lambda_ass: f.lambda_ass.unwrap_or(d.lambda_ass),
            ss_form: f.ss_form.unwrap_or(d.ss_form),
            ass_form: f.ass_form.unwrap_or(d.ass_form),
        }
    }

    pub fn shape(&self) -> vibcool::Result<ShapeFunction> {
        let grid = vibcool::pulse::TimeGrid::new(self.pulse.t_final, self.pulse.n_steps)?;
        match self.pulse.t_ramp {
            Some(t) => ShapeFunction::new(t, grid.t_final()),
            None => Ok(ShapeFunction::default_for(&grid)),
        }
    }

    pub fn krotov_options(&self) -> vibcool::Result<KrotovOptions> {
        let lambda = self.krotov.lambda.unwrap_or(f64::NAN);
        let mut o = KrotovOptions::new(lambda, self.shape()?);
        o.max_iterations = self.krotov.max_iterations;
        o.tolerance = self.krotov.tolerance;
        o.tol_mono = self.krotov.tol_mono;
        o.stride = self.krotov.stride;
        o.validate()?;
        Ok(o)
    }

    pub fn system_spec(&self) -> vibcool::Result<SystemSpec> {
        let s = &self.system;
        Ok(SystemSpec {
            mass: s.mass,
            grid: SpatialGrid::new(s.r_min, s.r_max, s.n_points)?,
            ground: s.ground.build()?,
            excited: s.excited.build()?,
            electronic_gap: s.electronic_gap,
            dipole: s.dipole,
            n_ground: s.n_ground,
            n_excited: s.n_excited,
            lifetime: s.lifetime,
        })
    }

    /// Switches the functional variant, restoring that variant's default
    /// weights and, for presets, its step-size parameter.
    pub fn with_variant(mut self, variant: Variant) -> Self {
        if variant == self.functional.variant {
            return self;
        }
        let f = &mut self.functional;
        f.variant = variant;
        f.lambda_ss = None;
        f.lambda_leak = None;
        f.lambda_yield = None;
        f.lambda_sym = None;
        f.lambda_ass = None;
        if let Some(name) = &self.system.preset {
            if let Ok(p) = presets::preset(name) {
                self.krotov.lambda = Some(p.lambda(variant));
            }
        }
        self
    }

    /// Text that parses back to this configuration.
    pub fn serialize(&self) -> String {
        let mut o = String::new();
        let s = &self.system;
        o.push_str("[system]\n");
        if let Some(p) = &s.preset {
            kv(&mut o, "preset", p);
        }
        kv(&mut o, "mass", format!("{:?} me", s.mass));
        kv(&mut o, "r_min", format!("{:?} bohr", s.r_min));
        kv(&mut o, "r_max", format!("{:?} bohr", s.r_max));
        kv(&mut o, "n_points", s.n_points);
        kv(&mut o, "electronic_gap", format!("{:?} hartree", s.electronic_gap));
        kv(&mut o, "dipole", format!("{:?} au", s.dipole));
        if let Some(n) = s.n_ground {
            kv(&mut o, "n_ground", n);
        }
        if let Some(n) = s.n_excited {
            kv(&mut o, "n_excited", n);
        }
        if let Some(t) = s.lifetime {
            kv(&mut o, "lifetime", format!("{t:?} au"));
        }
        for (name, p) in [("ground", &s.ground), ("excited", &s.excited)] {
            o.push_str(&format!("\n[{name}]\n"));
            match p {
                PotentialConfig::Morse { d_e, a, r_e } => {
                    kv(&mut o, "kind", "morse");
                    kv(&mut o, "d_e", format!("{d_e:?} hartree"));
                    kv(&mut o, "a", format!("{a:?} 1/bohr"));
                    kv(&mut o, "r_e", format!("{r_e:?} bohr"));
                }
                PotentialConfig::Harmonic { k, r_e } => {
                    kv(&mut o, "kind", "harmonic");
                    kv(&mut o, "k", format!("{k:?} hartree/bohr2"));
                    kv(&mut o, "r_e", format!("{r_e:?} bohr"));
                }
                PotentialConfig::Tabulated { path } => {
                    kv(&mut o, "kind", "tabulated");
                    kv(&mut o, "file", path.display());
                }
            }
        }
        let p = &self.pulse;
        o.push_str("\n[pulse]\n");
        kv(&mut o, "t_final", format!("{:?} au", p.t_final));
        kv(&mut o, "n_steps", p.n_steps);
        kv(&mut o, "center", format!("{:?} au", p.center));
        kv(&mut o, "fwhm", format!("{:?} au", p.fwhm));
        kv(&mut o, "peak", format!("{:?} au", p.peak));
        kv(&mut o, "detuning", format!("{:?} hartree", p.detuning));
        match p.carrier {
            Carrier::Line { ground, excited } => {
                kv(&mut o, "carrier_ground", ground);
                kv(&mut o, "carrier_excited", excited);
            }
            Carrier::Frequency(w) => kv(&mut o, "carrier", format!("{w:?} hartree")),
        }
        if let Some(t) = p.t_ramp {
            kv(&mut o, "t_ramp", format!("{t:?} au"));
        }
        match p.beam_area {
            Some(a) => kv(&mut o, "beam_area", format!("{a:?} m2")),
            None => kv(&mut o, "beam_area", "none"),
        }
        let f = &self.functional;
        o.push_str("\n[functional]\n");
        kv(&mut o, "variant", f.variant.as_str());
        kv(&mut o, "n_max", f.n_max);
        kv(&mut o, "n_star", f.n_star);
        for (key, v) in [
            ("lambda_ss", f.lambda_ss),
            ("lambda_leak", f.lambda_leak),
            ("lambda_yield", f.lambda_yield),
            ("lambda_sym", f.lambda_sym),
            ("lambda_ass", f.lambda_ass),
        ] {
            if let Some(v) = v {
                kv(&mut o, key, format!("{v:?}"));
            }
        }
        if let Some(x) = f.ss_form {
            kv(&mut o, "ss_form", x.as_str());
        }
        if let Some(x) = f.ass_form {
            kv(&mut o, "ass_form", x.as_str());
        }
        let k = &self.krotov;
        o.push_str("\n[krotov]\n");
        if let Some(l) = k.lambda {
            kv(&mut o, "lambda", format!("{l:?}"));
        }
        kv(&mut o, "max_iterations", k.max_iterations);
        kv(&mut o, "tolerance", format!("{:?}", k.tolerance));
        kv(&mut o, "tol_mono", format!("{:?}", k.tol_mono));
        kv(&mut o, "stride", k.stride);
        let c = &self.cooling;
        o.push_str("\n[cooling]\n");
        kv(&mut o, "initial_first", c.initial_first);
        kv(&mut o, "initial_last", c.initial_last);
        kv(&mut o, "n_cycles", c.n_cycles);
        match &c.pulse {
            PulseSource::Guess => kv(&mut o, "pulse", "guess"),
            PulseSource::Optimized => kv(&mut o, "pulse", "optimized"),
            PulseSource::File(p) => kv(&mut o, "pulse", p.display()),
        }
        o.push_str("\n[output]\n");
        kv(&mut o, "dir", self.output.dir.display());
        kv(&mut o, "trajectories", self.output.trajectories);
        o
    }

    /// Serialization with every defaulted functional weight written out.
    pub fn echo(&self) -> String {
        let mut full = self.clone();
        let fc = self.functional_config();
        let f = &mut full.functional;
        f.lambda_ss = Some(fc.lambda_ss);
        f.lambda_leak = Some(fc.lambda_leak);
        f.lambda_yield = Some(fc.lambda_yield);
        f.lambda_sym = Some(fc.lambda_sym);
        f.lambda_ass = Some(fc.lambda_ass);
        f.ss_form = Some(fc.ss_form);
        f.ass_form = Some(fc.ass_form);
        full.serialize()
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::serialize`].
    /// Identifies the run inputs; the output directory is left out.
    pub fn hash(&self) -> String {
        let mut inputs = self.clone();
        inputs.output.dir = PathBuf::new();
        let digest = Sha256::digest(inputs.serialize().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

fn kv(o: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(o, "{key} = {value}");
}
