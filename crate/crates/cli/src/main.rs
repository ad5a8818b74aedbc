//! `pwtool`: batch front end for the pwinterp toolkit.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Run;
use crate::config::Config;
use crate::error::{exit, CliError};
use crate::output::Artifacts;

#[derive(Parser)]
#[command(
    name = "pwtool",
    version,
    about = "Interpolation and control experiments in Paley-Wiener spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory (else the `out` key, then PWTOOL_OUT_DIR, then ./pwtool-out).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// `key=value` overrides applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Separation, Carleson products and Blaschke sum of a sequence.
    AnalyzeSequence(Common),
    /// Upper uniform density ratios over a window grid.
    Density(Common),
    /// Carleson constant of the measure built from a sequence.
    CarlesonMeasure(Common),
    /// Bump multiplier spectrum and constants for one epsilon.
    BuildMultiplier(Common),
    /// Multiplier values and decay certificate on a rectangle.
    MultiplierProbe(Common),
    /// Biorthogonal family: generated, or supplied spectra.
    BuildFamily(Common),
    /// Solve one interpolation problem.
    SolveInterpolation(Common),
    /// Random-data norm stability study.
    NormStudy(Common),
    /// McPhail measure constant and oracle.
    McphailCheck(Common),
    /// Minimal-norm control for a diagonal system.
    ControlSolve(Common),
    /// Simulate a diagonal system under a control signal.
    ControlSimulate(Common),
    /// Controllability constants and Gram condition profile.
    ControlReport(Common),
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        use Command::*;
        let name = match &self {
            AnalyzeSequence(_) => "analyze-sequence",
            Density(_) => "density",
            CarlesonMeasure(_) => "carleson-measure",
            BuildMultiplier(_) => "build-multiplier",
            MultiplierProbe(_) => "multiplier-probe",
            BuildFamily(_) => "build-family",
            SolveInterpolation(_) => "solve-interpolation",
            NormStudy(_) => "norm-study",
            McphailCheck(_) => "mcphail-check",
            ControlSolve(_) => "control-solve",
            ControlSimulate(_) => "control-simulate",
            ControlReport(_) => "control-report",
        };
        let common = match self {
            AnalyzeSequence(c)
            | Density(c)
            | CarlesonMeasure(c)
            | BuildMultiplier(c)
            | MultiplierProbe(c)
            | BuildFamily(c)
            | SolveInterpolation(c)
            | NormStudy(c)
            | McphailCheck(c)
            | ControlSolve(c)
            | ControlSimulate(c)
            | ControlReport(c) => c,
        };
        (name, common)
    }
}

fn execute(name: &str, common: Common) -> Result<(), CliError> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for item in &common.overrides {
        cfg.apply_override(item)?;
    }
    let out = common
        .out
        .or_else(|| cfg.get("out").map(PathBuf::from))
        .or_else(|| std::env::var_os("PWTOOL_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pwtool-out"));
    let seed: u64 = cfg.parse_or("seed", 0)?;
    let mut run = Run {
        command: name,
        cfg: &cfg,
        seed,
        art: Artifacts::default(),
    };
    for path in &cfg.sources {
        let bytes =
            std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        run.art.input(path, &bytes);
    }
    commands::dispatch(&mut run)?;
    let results = run.art.results().to_vec();
    let written = run.art.write(&out, name, seed, &cfg)?;
    for (k, v) in results {
        println!("{k} = {v}");
    }
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, common) = cli.command.split();
    match execute(name, common) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("pwtool {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
