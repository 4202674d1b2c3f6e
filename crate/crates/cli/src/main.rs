use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vibcool::functionals::Variant;
use vibcool_cli::{Command, RunConfig, Runner};

#[derive(Parser)]
#[command(name = "vibcool", version, about = "Shaped-pulse vibrational cooling of diatomic molecules")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Maximum number of Krotov iterations (overrides the config).
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Optimization functional (overrides the config).
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    /// No progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Vibrational eigenvalues of both surfaces.
    Solve,
    /// Franck-Condon map and Einstein coefficients.
    Fcmap,
    /// Krotov optimization of the cooling pulse.
    Optimize,
    /// Optical pumping cycles under a fixed pulse.
    Cool,
    /// All of the above in sequence.
    Pipeline,
}

#[derive(ValueEnum, Clone, Copy)]
enum VariantArg {
    Sym,
    Ass,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let mut cfg = match RunConfig::from_file(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(v) = cli.variant {
        cfg = cfg.with_variant(match v {
            VariantArg::Sym => Variant::Symmetrized,
            VariantArg::Ass => Variant::Assembly,
        });
    }
    if let Some(n) = cli.max_iter {
        cfg.krotov.max_iterations = n;
    }
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cmd = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Fcmap => Command::Fcmap,
        Cmd::Optimize => Command::Optimize,
        Cmd::Cool => Command::Cool,
        Cmd::Pipeline => Command::Pipeline,
    };
    let mut runner = Runner::new(cfg).quiet(cli.quiet);
    match runner.run(cmd) {
        Ok(()) => {
            if !cli.quiet {
                eprintln!("[vibcool] outputs in {}", runner.out_dir().display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
