//! Pipeline stages and their file outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use vibcool::cooling::{build_cycle_map, simulate_cooling, CoolingHistory, CoolingState};
use vibcool::functionals::TargetOperators;
use vibcool::krotov::{convergence_csv, optimize_with_observer, IterationRecord};
use vibcool::propagator::{propagate_forward, populations_csv, Propagator, TwoSurfaceState};
use vibcool::pulse::{gaussian_guess, pulse_energy, spectrum, Pulse, PulseEnergy, TimeGrid};
use vibcool::system::MolecularSystem;
use vibcool::units::HARTREE_TO_WAVENUMBER;

use crate::config::{Carrier, ConfigError, PulseSource, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Fcmap,
    Optimize,
    Cool,
    Pipeline,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Fcmap => "fcmap",
            Command::Optimize => "optimize",
            Command::Cool => "cool",
            Command::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("stage '{stage}' failed: {source}")]
    Stage { stage: &'static str, source: vibcool::Error },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for invalid input, 3 for failures while computing or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Stage { source: vibcool::Error::Config(_) | vibcool::Error::Parse { .. }, .. } => 2,
            _ => 3,
        }
    }
}

type RResult<T> = std::result::Result<T, RunError>;

fn stage<T>(name: &'static str, r: vibcool::Result<T>) -> RResult<T> {
    r.map_err(|source| RunError::Stage { stage: name, source })
}

/// Output files of one run, relative to the output directory.
pub const SUMMARY_FILE: &str = "summary.json";
pub const INCOMPLETE_FILE: &str = "INCOMPLETE";
pub const CONFIG_ECHO_FILE: &str = "config_used.cfg";

pub struct Runner {
    cfg: RunConfig,
    out: PathBuf,
    hash: String,
    quiet: bool,
    summary: Map<String, Value>,
    system: Option<MolecularSystem>,
    optimized: Option<Pulse>,
}

impl Runner {
    pub fn new(cfg: RunConfig) -> Self {
        let out = cfg.output.dir.clone();
        let hash = cfg.hash();
        Self { cfg, out, hash, quiet: false, summary: Map::new(), system: None, optimized: None }
    }

    /// Suppresses progress lines on stderr.
    pub fn quiet(mut self, quiet: bool) -> Self {
        self.quiet = quiet;
        self
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    fn log(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("[vibcool] {}", msg.as_ref());
        }
    }

    fn comments(&self) -> Vec<String> {
        vec![
            format!("vibcool {}", env!("CARGO_PKG_VERSION")),
            format!("config_hash = {}", self.hash),
        ]
    }

    fn write(&self, name: &str, contents: &str) -> RResult<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })
    }

    /// Runs `cmd`. On a stage failure an `INCOMPLETE` marker naming the
    /// stage is left next to whatever outputs were already written.
    pub fn run(&mut self, cmd: Command) -> RResult<()> {
        fs::create_dir_all(&self.out).map_err(|source| RunError::Io { path: self.out.clone(), source })?;
        let marker = self.out.join(INCOMPLETE_FILE);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|source| RunError::Io { path: marker.clone(), source })?;
        }
        self.write(CONFIG_ECHO_FILE, &self.cfg.echo())?;
        self.summary.insert("command".into(), json!(cmd.as_str()));
        self.summary.insert("config_hash".into(), json!(self.hash));
        let result = match cmd {
            Command::Solve => self.solve(),
            Command::Fcmap => self.fcmap(),
            Command::Optimize => self.optimize(),
            Command::Cool => self.cool(),
            Command::Pipeline => self.pipeline(),
        };
        self.summary.insert("complete".into(), json!(result.is_ok()));
        if let Err(e) = &result {
            self.summary.insert("error".into(), json!(e.to_string()));
            let _ = self.write(INCOMPLETE_FILE, &format!("{e}\n"));
        }
        let text = serde_json::to_string_pretty(&Value::Object(self.summary.clone())).expect("plain JSON values");
        self.write(SUMMARY_FILE, &(text + "\n"))?;
        result
    }

    fn pipeline(&mut self) -> RResult<()> {
        self.solve()?;
        self.fcmap()?;
        self.optimize()?;
        let guess = self.guess_pulse()?;
        self.cool_with(&guess, "guess", "cooling_history_guess.csv")?;
        self.cool()
    }

    fn ensure_system(&mut self) -> RResult<()> {
        if self.system.is_none() {
            self.log("solving vibrational levels");
            let spec = stage("solve", self.cfg.system_spec())?;
            self.system = Some(stage("solve", MolecularSystem::build(spec))?);
        }
        Ok(())
    }

    fn sys(&self) -> &MolecularSystem {
        self.system.as_ref().expect("ensure_system runs first")
    }

    fn guess_pulse(&mut self) -> RResult<Pulse> {
        let p = self.cfg.pulse.clone();
        self.ensure_system()?;
        let sys = self.sys();
        let omega_l = match p.carrier {
            Carrier::Frequency(w) => w,
            Carrier::Line { ground, excited } => {
                if ground >= sys.n_ground() || excited >= sys.n_excited() {
                    return Err(RunError::Stage {
                        stage: "optimize",
                        source: vibcool::Error::Config(format!(
                            "carrier line {ground} -> {excited} outside the retained levels"
                        )),
                    });
                }
                sys.transition_energy(ground, excited)
            }
        };
        let grid = stage("optimize", TimeGrid::new(p.t_final, p.n_steps))?;
        let pulse = stage("optimize", gaussian_guess(grid, p.center, p.fwhm, p.peak, p.detuning, omega_l))?;
        Ok(pulse.shaped(&stage("optimize", self.cfg.shape())?))
    }

    fn solve(&mut self) -> RResult<()> {
        self.ensure_system()?;
        let sys = self.sys();
        let mut csv = String::new();
        for c in self.comments() {
            let _ = writeln!(csv, "# {c}");
        }
        csv.push_str("# units: energy in Hartree and cm^-1, measured from each surface's potential minimum\n");
        csv.push_str("surface,level,energy_hartree,energy_cm-1\n");
        for (name, basis) in [("ground", sys.ground()), ("excited", sys.excited())] {
            for (v, e) in basis.energies().iter().enumerate() {
                let _ = writeln!(csv, "{name},{v},{e:.16e},{:.10e}", e * HARTREE_TO_WAVENUMBER);
            }
        }
        let n = json!({
            "n_ground": sys.n_ground(),
            "n_excited": sys.n_excited(),
            "ground_zero_point_hartree": sys.ground().energies()[0],
            "excited_zero_point_hartree": sys.excited().energies()[0],
        });
        self.write("eigenvalues.csv", &csv)?;
        self.summary.insert("solve".into(), n);
        self.log("wrote eigenvalues.csv");
        Ok(())
    }

    fn fcmap(&mut self) -> RResult<()> {
        let comments = self.comments();
        self.ensure_system()?;
        let sys = self.sys();
        let fc = sys.franck_condon();
        let em = sys.emission();
        let fc_csv = fc.to_csv(&comments);
        let mut ein = String::new();
        for c in &comments {
            let _ = writeln!(ein, "# {c}");
        }
        ein.push_str("# units: rates in inverse atomic time units (4.134e16 s^-1), branching dimensionless\n");
        ein.push_str("excited,ground,einstein_a,branching\n");
        for l in 0..fc.n_excited() {
            let b = em.branching(l);
            for (m, bm) in b.iter().enumerate() {
                let _ = writeln!(ein, "{l},{m},{:.16e},{:.16e}", em.einstein()[(l, m)], bm);
            }
        }
        let target_decay: Vec<f64> = (0..fc.n_excited()).map(|l| fc.get(l, 0).powi(2)).collect();
        let best = target_decay.iter().copied().fold(0.0, f64::max);
        let n = json!({
            "lifetime_au": em.lifetime(),
            "max_target_decay_strength": best,
            "continuum_fraction": em.continuum_fraction(),
            "flagged_pairs": em.flagged().len(),
        });
        self.write("fc_map.csv", &fc_csv)?;
        self.write("einstein.csv", &ein)?;
        self.summary.insert("fcmap".into(), n);
        self.log("wrote fc_map.csv, einstein.csv");
        Ok(())
    }

    fn optimize(&mut self) -> RResult<()> {
        let guess = self.guess_pulse()?;
        let comments = self.comments();
        let fcfg = self.cfg.functional_config();
        let opts = stage("optimize", self.cfg.krotov_options())?;
        let quiet = self.quiet;
        self.ensure_system()?;
        let sys = self.sys();
        let ham = stage("optimize", sys.hamiltonian(guess.omega_l()))?;
        let ops = stage("optimize", TargetOperators::new(sys.franck_condon(), fcfg.n_max))?;

        let mut seen: Vec<IterationRecord> = Vec::new();
        let result = optimize_with_observer(&ham, &ops, &guess, &fcfg, &opts, |r| {
            if !quiet && r.iteration % 10 == 0 {
                eprintln!("[vibcool] iteration {:5}  J_T = {:.10e}  J_ss = {:.3e}", r.iteration, r.terms.j_t, r.terms.j_ss);
            }
            seen.push(r.clone());
        });
        let res = match result {
            Ok(r) => r,
            Err(source) => {
                self.write("convergence.csv", &convergence_csv(&seen, &comments))?;
                return Err(RunError::Stage { stage: "optimize", source });
            }
        };
        self.log(format!(
            "optimization finished after {} iterations ({:.1} s)",
            res.iterations(),
            res.wall_seconds
        ));

        let trajectories = if self.cfg.output.trajectories {
            let mut files = Vec::new();
            let times_fs: Vec<f64> = res.pulse.grid().times().iter().map(|&t| vibcool::units::au_to_fs(t)).collect();
            let mut pcomments = comments.clone();
            pcomments.push("t in fs".into());
            for n in 0..=fcfg.n_max {
                let init = TwoSurfaceState::ground_level(ham.n_ground(), ham.n_excited(), n);
                let mut prop = Propagator::new(&ham);
                let traj = stage("optimize", propagate_forward(&mut prop, &init, &res.pulse, 1))?;
                let states = stage("optimize", traj.all_states(&mut prop))?;
                let name = format!("populations_v{n}.csv");
                files.push((name, populations_csv(&times_fs, &states, &pcomments)));
            }
            files
        } else {
            Vec::new()
        };

        let area = self.cfg.pulse.beam_area;
        let energy = |p: &Pulse| -> RResult<Value> {
            Ok(match stage("optimize", pulse_energy(p, area))? {
                PulseEnergy::Microjoule(e) => json!({ "microjoule": e }),
                PulseEnergy::FluenceAu(f) => json!({ "fluence_au": f }),
            })
        };
        let guess_spec = spectrum(&guess);
        let opt_spec = spectrum(&res.pulse);
        let t = res.final_terms();
        let n = json!({
            "variant": fcfg.variant.as_str(),
            "n_max": fcfg.n_max,
            "lambda": opts.lambda,
            "iterations": res.iterations(),
            "converged": res.converged,
            "j_t": t.j_t,
            "j_ss": t.j_ss,
            "j_leak": t.j_leak,
            "j_yield": t.j_yield,
            t.balance_name(): t.j_balance,
            "sigma": t.sigma,
            "guess_j_t": res.records[0].terms.j_t,
            "guess_energy": energy(&guess)?,
            "optimized_energy": energy(&res.pulse)?,
            "guess_spectral_fwhm_cm-1": guess_spec.fwhm() * HARTREE_TO_WAVENUMBER,
            "optimized_spectral_fwhm_cm-1": opt_spec.fwhm() * HARTREE_TO_WAVENUMBER,
            "optimized_max_amplitude_au": res.pulse.max_amplitude(),
        });
        self.write("convergence.csv", &res.convergence_csv(&comments))?;
        self.write("pulse_guess.csv", &guess.to_csv(&comments))?;
        self.write("pulse_optimized.csv", &res.pulse.to_csv(&comments))?;
        self.write("spectrum_guess.csv", &guess_spec.to_csv(&comments))?;
        self.write("spectrum_optimized.csv", &opt_spec.to_csv(&comments))?;
        for (name, text) in &trajectories {
            self.write(name, text)?;
        }
        self.summary.insert("optimize".into(), n);
        self.log("wrote convergence.csv, pulse_*.csv, spectrum_*.csv");
        self.optimized = Some(res.pulse);
        Ok(())
    }

    fn cool(&mut self) -> RResult<()> {
        let (pulse, label) = match self.cfg.cooling.pulse.clone() {
            PulseSource::Guess => (self.guess_pulse()?, "guess".to_string()),
            PulseSource::Optimized => match &self.optimized {
                Some(p) => (p.clone(), "optimized".to_string()),
                None => {
                    let path = self.out.join("pulse_optimized.csv");
                    (read_pulse(&path)?, "optimized".to_string())
                }
            },
            PulseSource::File(path) => (read_pulse(&path)?, path.display().to_string()),
        };
        self.cool_with(&pulse, &label, "cooling_history.csv")
    }

    fn cool_with(&mut self, pulse: &Pulse, label: &str, file: &str) -> RResult<()> {
        let comments = self.comments();
        let c = self.cfg.cooling.clone();
        self.log(format!("simulating {} cycles with the {label} pulse", c.n_cycles));
        self.ensure_system()?;
        let sys = self.sys();
        let ham = stage("cool", sys.hamiltonian(pulse.omega_l()))?;
        let map = stage("cool", build_cycle_map(&ham, pulse, sys.emission()))?;
        let init = stage("cool", CoolingState::equipartition(sys.n_ground(), c.initial_first, c.initial_last))?;
        let hist = stage("cool", simulate_cooling(&init, &map, c.n_cycles))?;
        let mut cc = comments;
        cc.push(format!("pulse = {label}"));
        self.write(file, &hist.to_csv(&cc))?;
        let key = if file == "cooling_history.csv" { "cool".to_string() } else { format!("cool_{label}") };
        self.summary.insert(key, cooling_json(&hist, label));
        Ok(())
    }
}

fn read_pulse(path: &Path) -> RResult<Pulse> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Stage {
        stage: "cool",
        source: vibcool::Error::Config(format!("cannot read pulse file {}: {e}", path.display())),
    })?;
    stage("cool", Pulse::from_csv(&text))
}

fn cooling_json(h: &CoolingHistory, label: &str) -> Value {
    let s = &h.summary;
    json!({
        "pulse": label,
        "cycles_to_90pct": s.cycles_to_90pct,
        "max_target_population": s.max_target_population,
        "cycles_at_max": s.cycles_at_max,
        "final_target_population": s.final_target_population,
        "final_purity": s.final_purity,
        "final_lost": s.final_lost,
    })
}
