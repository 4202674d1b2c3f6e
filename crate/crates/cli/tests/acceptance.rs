//! Acceptance suite.
//!
//! Runs every acceptance criterion in order and prints one line per
//! criterion:
//!
//! ```text
//! PASS  C1  eigensolver oracle: max rel err 3.1e-9 over v = 0..14 [0.21 s]
//! ```
//!
//! The optimizations are shared between criteria: the four n_max = 5 runs
//! of C5 feed C8 and the diffuse part of C9, and the compact-parabola
//! pipeline run feeds C3, C7, the compact part of C9 and C10. Exits non-zero
//! if any criterion fails.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;
use serde_json::Value;
use vibcool::cooling::{build_cycle_map, simulate_cooling, CoolingHistory, CoolingState};
use vibcool::functionals::{
    costate_boundary, eval_terms, sigma_approx, sigma_exact, FunctionalConfig, TargetOperators, Variant,
};
use vibcool::krotov::{optimize, KrotovOptions, OptimizationResult};
use vibcool::presets::preset;
use vibcool::propagator::{Propagator, TwoSurfaceHamiltonian, TwoSurfaceState};
use vibcool::pulse::{gaussian_guess, Pulse, ShapeFunction, TimeGrid};
use vibcool::quantum_core::{franck_condon_map, solve_vibrational, FranckCondonMap, Potential, SpatialGrid};
use vibcool::system::MolecularSystem;
use vibcool::C64;
use vibcool_cli::{Command, RunConfig, Runner};

// ═══════════════════════════════════════════════════════════════════════════
// Tolerances
// ═══════════════════════════════════════════════════════════════════════════

const C1_REL: f64 = 1e-6;
const C1_LEVELS: usize = 15;
const C2_ABS: f64 = 1e-4;
const C2_LEVELS: usize = 10;
const C3_RATIO: f64 = 1e4;
const C3_REL: f64 = 1e-3;
const C3_SLOPE_TOL: f64 = 0.15;
const C4_ENSEMBLES: usize = 20;
const C4_REL: f64 = 1e-5;
const C5_ITERATIONS: usize = 300;
const C5_N_MAX: usize = 5;
const MONO_TOL: f64 = 1e-10;
const C6_YIELD: f64 = 0.99;
const C6_ITERATIONS: usize = 200;
const C7_J_SS: f64 = 1e-4;
const C9_CYCLES: usize = 200;
const C9_MAX_P0: f64 = 0.95;
const C10_NORM: f64 = 1e-9;
const C10_CYCLES: usize = 10_000;

/// Krotov iterations of the compact-parabola pipeline run.
const PIPELINE_ITERATIONS: usize = 200;

// ═══════════════════════════════════════════════════════════════════════════
// Reporting
// ═══════════════════════════════════════════════════════════════════════════

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn line(&mut self, id: &'static str, pass: bool, what: &str, took: Duration) {
        let tag = if pass { "PASS" } else { "FAIL" };
        let text = format!("{tag}  {id:<3} {what} [{:.2} s]\n", took.as_secs_f64());
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
        let _ = out.flush();
        if !pass {
            self.failed.push(id);
        }
    }
}

fn progress(msg: &str) {
    eprintln!("      .. {msg}");
}

// ═══════════════════════════════════════════════════════════════════════════
// C1, C2: field-free structure
// ═══════════════════════════════════════════════════════════════════════════

fn c1_morse(r: &mut Report) {
    let start = Instant::now();
    let (d_e, a, r_e, mass) = (0.02, 0.7, 6.0, 1.0e4);
    let grid = SpatialGrid::new(3.5, 24.0, 256).unwrap();
    let basis = solve_vibrational(&Potential::morse(d_e, a, r_e), &grid, mass, Some(C1_LEVELS)).unwrap();
    let omega = a * (2.0 * d_e / mass).sqrt();
    let worst = (0..C1_LEVELS)
        .map(|v| {
            let x = v as f64 + 0.5;
            let exact = omega * x - (omega * x).powi(2) / (4.0 * d_e);
            (basis.energies()[v] - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    r.line(
        "C1",
        worst <= C1_REL && secs < 1.0,
        &format!("eigensolver oracle: max rel err {worst:.1e} over v = 0..{}", C1_LEVELS - 1),
        start.elapsed(),
    );
}

fn c2_poisson(r: &mut Report) {
    let start = Instant::now();
    let (omega, mass, d) = (0.0014, 1.0e4, 0.1);
    let grid = SpatialGrid::new(4.0, 8.0, 128).unwrap();
    let g = solve_vibrational(&Potential::harmonic(omega, mass, 6.0), &grid, mass, Some(14)).unwrap();
    let e = solve_vibrational(&Potential::harmonic(omega, mass, 6.0 + d), &grid, mass, Some(14)).unwrap();
    let fc = franck_condon_map(&g, &e, 1.0).unwrap();
    let s = 0.5 * mass * omega * d * d;
    let mut worst: f64 = 0.0;
    let mut log_fact = 0.0;
    for m in 0..=C2_LEVELS {
        if m > 0 {
            log_fact += (m as f64).ln();
        }
        let poisson = (-s + m as f64 * s.ln() - log_fact).exp();
        worst = worst.max((fc.get(0, m).powi(2) - poisson).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        "C2",
        worst <= C2_ABS && secs < 1.0,
        &format!("FC oracle (Huang-Rhys S = {s:.3}): max abs err {worst:.1e} for m <= {C2_LEVELS}"),
        start.elapsed(),
    );
}

// ═══════════════════════════════════════════════════════════════════════════
// C3: decay-overlap approximation
// ═══════════════════════════════════════════════════════════════════════════

fn relative_sigma_error(psi: &TwoSurfaceState, sys: &MolecularSystem, ops: &TargetOperators, t_e: f64) -> f64 {
    let approx = sigma_approx(psi, ops);
    let exact = sigma_exact(psi, sys.franck_condon(), sys.excited().energies(), t_e).unwrap().value;
    (exact - approx).abs() / approx
}

fn c3_sigma(r: &mut Report, sys: &MolecularSystem, pulse: &Pulse) {
    let start = Instant::now();
    let ham = sys.hamiltonian(pulse.omega_l()).unwrap();
    let ops = TargetOperators::new(sys.franck_condon(), 1).unwrap();
    let t_pulse = pulse.grid().t_final();
    // member 1 is the one the assembly line excites
    let psi = Propagator::new(&ham).propagate(&TwoSurfaceState::ground_level(sys.n_ground(), sys.n_excited(), 1), pulse).unwrap();
    let rel = relative_sigma_error(&psi, sys, &ops, C3_RATIO * t_pulse);

    // RMS over a +-10 % window smooths the oscillation in T_e; the slope of
    // log RMS against log T_e across one decade should be -1.
    let centers: Vec<f64> = (0..=10).map(|i| C3_RATIO * t_pulse * 10f64.powf(i as f64 / 10.0)).collect();
    let rms: Vec<f64> = centers
        .iter()
        .map(|&c| {
            let n = 400;
            let ms: f64 = (0..n)
                .map(|j| {
                    let t = c * (0.9 + 0.2 * j as f64 / (n - 1) as f64);
                    relative_sigma_error(&psi, sys, &ops, t).powi(2)
                })
                .sum::<f64>()
                / n as f64;
            ms.sqrt()
        })
        .collect();
    let xs: Vec<f64> = centers.iter().map(|c| c.ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    r.line(
        "C3",
        rel <= C3_REL && (slope + 1.0).abs() <= C3_SLOPE_TOL,
        &format!("sigma approximation: rel err {rel:.1e} at T_e/T = {C3_RATIO:.0e}, log-log slope {slope:.3}"),
        start.elapsed(),
    );
}

// ═══════════════════════════════════════════════════════════════════════════
// C4: costate gradients
// ═══════════════════════════════════════════════════════════════════════════

fn single_term_configs(variant: Variant, n_max: usize) -> Vec<FunctionalConfig> {
    let zero = FunctionalConfig {
        lambda_ss: 0.0,
        lambda_leak: 0.0,
        lambda_yield: 0.0,
        lambda_sym: 0.0,
        lambda_ass: 0.0,
        n_star: 2,
        ..FunctionalConfig::default_for(variant, n_max)
    };
    let balance = match variant {
        Variant::Symmetrized => FunctionalConfig { lambda_sym: 1.0, ..zero.clone() },
        Variant::Assembly => FunctionalConfig { lambda_ass: 1.0, ..zero.clone() },
    };
    vec![
        FunctionalConfig { lambda_ss: 1.0, ..zero.clone() },
        FunctionalConfig { lambda_leak: 1.0, ..zero.clone() },
        FunctionalConfig { lambda_yield: 1.0, ..zero },
        balance,
    ]
}

fn gradient_error(psi: &[TwoSurfaceState], cfg: &FunctionalConfig, ops: &TargetOperators) -> f64 {
    let chi = costate_boundary(psi, cfg, ops).unwrap();
    let j = |s: &[TwoSurfaceState]| eval_terms(s, cfg, ops).unwrap().j_t;
    let h = 1e-5;
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for n in 0..psi.len() {
        for i in 0..psi[n].amplitudes().len() {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut plus = psi.to_vec();
                let mut minus = psi.to_vec();
                plus[n].amplitudes_mut()[i] += dir * h;
                minus[n].amplitudes_mut()[i] -= dir * h;
                let fd = (j(&plus) - j(&minus)) / (2.0 * h);
                let c = chi[n].amplitudes()[i];
                let analytic = 2.0 * if dir.re != 0.0 { c.re } else { c.im };
                worst = worst.max((fd - analytic).abs());
                scale = scale.max(analytic.abs());
            }
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

fn c4_gradients(r: &mut Report, sys: &MolecularSystem) {
    let start = Instant::now();
    let n_max = C5_N_MAX;
    let ops = TargetOperators::new(sys.franck_condon(), n_max).unwrap();
    let (ng, ne) = (sys.n_ground(), sys.n_excited());
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let mut worst: f64 = 0.0;
    for _ in 0..C4_ENSEMBLES {
        let psi: Vec<TwoSurfaceState> = (0..=n_max)
            .map(|_| {
                let g: Vec<C64> = (0..ng).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
                let e: Vec<C64> = (0..ne).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
                TwoSurfaceState::from_parts(&g, &e)
            })
            .collect();
        for variant in [Variant::Symmetrized, Variant::Assembly] {
            for cfg in single_term_configs(variant, n_max) {
                worst = worst.max(gradient_error(&psi, &cfg, &ops));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        "C4",
        worst < C4_REL && secs < 10.0,
        &format!("gradient check: max rel err {worst:.1e} over {C4_ENSEMBLES} ensembles x 2 variants x 4 terms"),
        start.elapsed(),
    );
}

// ═══════════════════════════════════════════════════════════════════════════
// C5: monotonic convergence
// ═══════════════════════════════════════════════════════════════════════════

struct PresetRun {
    system: MolecularSystem,
    guess: Pulse,
    ham: TwoSurfaceHamiltonian,
    result: Result<OptimizationResult, vibcool::Error>,
    seconds: f64,
}

fn preset_run(name: &str, variant: Variant, n_max: usize, iterations: usize) -> PresetRun {
    let p = preset(name).unwrap();
    let system = MolecularSystem::build(p.system.clone()).unwrap();
    let guess = p.pulse.build(&system).unwrap();
    let ham = system.hamiltonian(guess.omega_l()).unwrap();
    let ops = TargetOperators::new(system.franck_condon(), n_max).unwrap();
    let cfg = FunctionalConfig::default_for(variant, n_max);
    let mut opts = KrotovOptions::new(p.lambda(variant), p.pulse.shape().unwrap());
    opts.max_iterations = iterations;
    opts.tolerance = 0.0;
    let t0 = Instant::now();
    let result = optimize(&ham, &ops, &guess, &cfg, &opts);
    PresetRun { system, guess, ham, result, seconds: t0.elapsed().as_secs_f64() }
}

fn c5_monotonic(r: &mut Report) -> Vec<(String, Variant, PresetRun)> {
    let start = Instant::now();
    let mut runs = Vec::new();
    let mut pass = true;
    let mut notes = Vec::new();
    for name in ["compact-parabola", "diffuse"] {
        for variant in [Variant::Symmetrized, Variant::Assembly] {
            progress(&format!("C5: {name} / {} ({C5_ITERATIONS} iterations)", variant.as_str()));
            let run = preset_run(name, variant, C5_N_MAX, C5_ITERATIONS);
            match &run.result {
                Ok(res) => {
                    let j: Vec<f64> = res.records.iter().map(|x| x.terms.j_t).collect();
                    let worst_rise = j.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
                    let ok = res.iterations() >= C5_ITERATIONS && worst_rise <= MONO_TOL && run.seconds < 600.0;
                    pass &= ok;
                    notes.push(format!(
                        "{name}/{}: J_T {:.3e} -> {:.3e} ({:.0} s)",
                        variant.as_str(),
                        j[0],
                        j[j.len() - 1],
                        run.seconds
                    ));
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("{name}/{}: {e}", variant.as_str()));
                }
            }
            runs.push((name.to_string(), variant, run));
        }
    }
    r.line("C5", pass, &format!("monotonic convergence, n_max = {C5_N_MAX}: {}", notes.join("; ")), start.elapsed());
    runs
}

// ═══════════════════════════════════════════════════════════════════════════
// C6: two-level pi pulse
// ═══════════════════════════════════════════════════════════════════════════

fn c6_pi_pulse(r: &mut Report) {
    let start = Instant::now();
    // ground levels 0 (target) and 1, one excited level decaying only into 0
    let eg = [0.0, 0.0014];
    let ee = [0.0005];
    let gap = 0.07;
    let fc = FranckCondonMap::from_matrix(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), 2f64.sqrt()).unwrap();
    let omega_l = gap + ee[0] - eg[1];
    let ham = TwoSurfaceHamiltonian::new(&eg, &ee, gap, omega_l, &fc).unwrap();
    let ops = TargetOperators::new(&fc, 1).unwrap();
    let cfg = FunctionalConfig {
        lambda_ss: 0.0,
        lambda_leak: 0.0,
        lambda_yield: 1.0,
        lambda_ass: 0.0,
        ..FunctionalConfig::assembly(1)
    };
    let grid = TimeGrid::new(4000.0, 400).unwrap();
    let shape = ShapeFunction::default_for(&grid);
    let guess = gaussian_guess(grid, 2000.0, 1000.0, 5e-4, 0.0, omega_l).unwrap().shaped(&shape);
    let mut opts = KrotovOptions::new(5.0, shape);
    opts.max_iterations = C6_ITERATIONS;
    opts.tolerance = 0.0;
    let summary = match optimize(&ham, &ops, &guess, &cfg, &opts) {
        Ok(res) => {
            let psi = Propagator::new(&ham).propagate(&TwoSurfaceState::ground_level(2, 1, 1), &res.pulse).unwrap();
            let excited = psi.excited_population();
            let first = res.records.iter().find(|x| 1.0 - x.terms.j_yield >= C6_YIELD).map(|x| x.iteration);
            let guess_excited = 1.0 - res.records[0].terms.j_yield;
            (
                first.is_some() && excited >= C6_YIELD,
                format!(
                    "pi pulse: 1 - J_yield reached {C6_YIELD} at iteration {first:?} (guess {guess_excited:.3}); \
                     propagated P_e = {excited:.5}"
                ),
            )
        }
        Err(e) => (false, format!("pi pulse: {e}")),
    };
    r.line("C6", summary.0, &summary.1, start.elapsed());
}

// ═══════════════════════════════════════════════════════════════════════════
// Pipeline run (C7, compact part of C9, CLI acceptance bound)
// ═══════════════════════════════════════════════════════════════════════════

fn pipeline_config(dir: &Path) -> RunConfig {
    let text = format!(
        "[system]\npreset = compact-parabola\n\n[functional]\nvariant = ass\n\n\
         [krotov]\nmax_iterations = {PIPELINE_ITERATIONS}\n\n[cooling]\ninitial_first = 1\ninitial_last = 10\n\
         n_cycles = {C9_CYCLES}\n\n[output]\ndir = out\n"
    );
    RunConfig::parse_str(&text, dir).unwrap()
}

fn read_summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

// ═══════════════════════════════════════════════════════════════════════════
// C8, C9
// ═══════════════════════════════════════════════════════════════════════════

fn cooling_under(run: &PresetRun, pulse: &Pulse) -> CoolingHistory {
    let map = build_cycle_map(&run.ham, pulse, run.system.emission()).unwrap();
    let init = CoolingState::equipartition(run.system.n_ground(), 1, 10).unwrap();
    simulate_cooling(&init, &map, C9_CYCLES).unwrap()
}

fn c8_leakage(r: &mut Report, runs: &[(String, Variant, PresetRun)]) {
    let start = Instant::now();
    let leak = |v: Variant| {
        runs.iter()
            .find(|(n, var, _)| n == "diffuse" && *var == v)
            .and_then(|(_, _, run)| run.result.as_ref().ok())
            .map(|res| res.final_terms().j_leak)
    };
    let (pass, what) = match (leak(Variant::Symmetrized), leak(Variant::Assembly)) {
        (Some(s), Some(a)) => (a < s, format!("leakage contrast on diffuse: J_leak ass {a:.3e} vs sym {s:.3e}")),
        _ => (false, "leakage contrast on diffuse: optimization failed".to_string()),
    };
    r.line("C8", pass, &what, start.elapsed());
}

fn c9_cooling(r: &mut Report, runs: &[(String, Variant, PresetRun)], compact: Option<&Value>) {
    let start = Instant::now();
    let (compact_ok, compact_note) = match compact {
        Some(cool) => {
            let c90 = cool["cycles_to_90pct"].as_u64();
            let max = cool["max_target_population"].as_f64().unwrap_or(0.0);
            (
                c90.is_some_and(|c| c as usize <= C9_CYCLES) && max >= C9_MAX_P0,
                format!("compact: p_0 >= 0.9 after {c90:?} cycles, max p_0 {max:.4}"),
            )
        }
        None => (false, "compact: pipeline failed".to_string()),
    };
    let diffuse = runs.iter().find(|(n, v, _)| n == "diffuse" && *v == Variant::Assembly).map(|(_, _, run)| run);
    let (diffuse_ok, diffuse_note) = match diffuse.map(|run| (run, run.result.as_ref())) {
        Some((run, Ok(res))) => {
            let guess = cooling_under(run, &run.guess);
            let opt = cooling_under(run, &res.pulse);
            let first = &guess.states[0];
            let (g_end, o_end) = (guess.states.last().unwrap(), opt.states.last().unwrap());
            let g_dp0 = g_end.target_population() - first.target_population();
            let g_dlost = g_end.lost - first.lost;
            let o_dp0 = o_end.target_population() - first.target_population();
            let o_dlost = o_end.lost - first.lost;
            // heating: more population destroyed than delivered to the target
            let heating = g_dp0 < 0.0 || g_dlost > g_dp0;
            let cooling = o_dp0 > 0.0 && o_dp0 > o_dlost;
            (
                heating && cooling,
                format!(
                    "diffuse guess: dp_0 {g_dp0:+.3e}, dlost {g_dlost:+.3e}; optimized: dp_0 {o_dp0:+.3e}, dlost {o_dlost:+.3e}"
                ),
            )
        }
        _ => (false, "diffuse: optimization failed".to_string()),
    };
    r.line("C9", compact_ok && diffuse_ok, &format!("end-to-end cooling: {compact_note}; {diffuse_note}"), start.elapsed());
}

// ═══════════════════════════════════════════════════════════════════════════
// C10: conservation and determinism
// ═══════════════════════════════════════════════════════════════════════════

fn c10_conservation(r: &mut Report, sys: &MolecularSystem, pulse: &Pulse) {
    let start = Instant::now();
    let ham = sys.hamiltonian(pulse.omega_l()).unwrap();
    let mut prop = Propagator::new(&ham);
    let drift = (0..sys.n_ground())
        .map(|m| {
            let psi = prop.propagate(&TwoSurfaceState::ground_level(sys.n_ground(), sys.n_excited(), m), pulse).unwrap();
            (psi.norm_sqr() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let map = build_cycle_map(&ham, pulse, sys.emission()).unwrap();
    let init = CoolingState::equipartition(sys.n_ground(), 1, 10).unwrap();
    let hist = simulate_cooling(&init, &map, C10_CYCLES).unwrap();
    let balance = hist.states.iter().map(|s| (s.retained() + s.lost - 1.0).abs()).fold(0.0, f64::max);

    let tmp = tempfile::tempdir().unwrap();
    let run_once = |sub: &str| -> Vec<(String, Vec<u8>)> {
        let dir = tmp.path().join(sub);
        let text = format!(
            "[system]\npreset = harmonic\n[krotov]\nmax_iterations = 5\n[cooling]\nn_cycles = 20\ninitial_last = 5\n\
             [output]\ndir = {}\n",
            dir.display()
        );
        let cfg = RunConfig::parse_str(&text, tmp.path()).unwrap();
        Runner::new(cfg).quiet(true).run(Command::Pipeline).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .filter(|(name, _)| name != "config_used.cfg")
            .collect();
        files.sort();
        files
    };
    let (a, b) = (run_once("a"), run_once("b"));
    let identical = a == b && !a.is_empty();
    r.line(
        "C10",
        drift < C10_NORM && balance < C10_NORM && identical,
        &format!(
            "conservation: norm drift {drift:.1e}, cycle balance {balance:.1e} over {C10_CYCLES} cycles; \
             {} output files byte-identical: {identical}",
            a.len()
        ),
        start.elapsed(),
    );
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    let total = Instant::now();

    c1_morse(&mut r);
    c2_poisson(&mut r);

    let compact = preset("compact-parabola").unwrap();
    let compact_sys = MolecularSystem::build(compact.system.clone()).unwrap();
    c4_gradients(&mut r, &compact_sys);

    progress(&format!("compact-parabola pipeline, assembly, {PIPELINE_ITERATIONS} iterations"));
    let t_pipeline = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = pipeline_config(tmp.path());
    let out = cfg.output.dir.clone();
    let pipeline_ok = Runner::new(cfg).quiet(true).run(Command::Pipeline).is_ok();
    let pipeline_time = t_pipeline.elapsed();
    let summary = read_summary(&out);
    let optimized = fs::read_to_string(out.join("pulse_optimized.csv")).ok().and_then(|t| Pulse::from_csv(&t).ok());

    match &optimized {
        Some(p) => c3_sigma(&mut r, &compact_sys, p),
        None => r.line("C3", false, "sigma approximation: no optimized pulse", Duration::ZERO),
    }

    let runs = c5_monotonic(&mut r);
    c6_pi_pulse(&mut r);

    let j_ss = summary["optimize"]["j_ss"].as_f64();
    r.line(
        "C7",
        pipeline_ok && j_ss.is_some_and(|j| j <= C7_J_SS),
        &format!(
            "dark state on compact-parabola (assembly, n_max = {}): J_ss = {}",
            compact.n_max,
            j_ss.map_or("n/a".to_string(), |j| format!("{j:.2e}"))
        ),
        pipeline_time,
    );

    c8_leakage(&mut r, &runs);
    c9_cooling(&mut r, &runs, pipeline_ok.then(|| &summary["cool"]));

    match &optimized {
        Some(p) => c10_conservation(&mut r, &compact_sys, p),
        None => r.line("C10", false, "conservation: no optimized pulse", Duration::ZERO),
    }

    println!(
        "{} of 10 criteria passed in {:.0} s",
        10 - r.failed.len(),
        total.elapsed().as_secs_f64()
    );
    if !r.failed.is_empty() {
        println!("failed: {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
