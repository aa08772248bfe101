use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mkdv_core::commands::{run_command, Command};
use mkdv_core::config::ExperimentConfig;
use mkdv_core::Error;

/// Damped, forced mKdV on the torus: simulation, diagnostics and
/// multilinear estimate experiments.
#[derive(Parser)]
#[command(name = "mkdv", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single run: diagnostics CSV, checkpoints, manifest.
    Simulate { config: PathBuf },
    /// Single run with a required `[diagnostics]` I-operator.
    Diagnose { config: PathBuf },
    /// Almost-conservation sweep over the cutoffs in `[slope]`.
    Slope { config: PathBuf },
    /// Trilinear ratio ensembles over `[lab]`.
    Trilinear { config: PathBuf },
    /// L4 Strichartz ratio ensembles over `[lab]`.
    Strichartz { config: PathBuf },
    /// Three-wave counterexample over `[counterexample]`.
    Counterexample { config: PathBuf },
    /// Seed ensemble with the moving-cutoff splitting.
    Attractor { config: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Blowup { .. } => 3,
        Error::Inconclusive(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, path) = match cli.cmd {
        Cmd::Simulate { config } => (Command::Simulate, config),
        Cmd::Diagnose { config } => (Command::Diagnose, config),
        Cmd::Slope { config } => (Command::Slope, config),
        Cmd::Trilinear { config } => (Command::Trilinear, config),
        Cmd::Strichartz { config } => (Command::Strichartz, config),
        Cmd::Counterexample { config } => (Command::Counterexample, config),
        Cmd::Attractor { config } => (Command::Attractor, config),
    };
    let cfg = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    log::info!("{} -> {}", cmd.name(), cfg.output.display());
    match run_command(cmd, &cfg) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
