use std::path::PathBuf;
use std::process::ExitCode;

use cavity_blockade::cli::{cmd_basis, run_mode, Overrides};
use cavity_blockade::config::{Mode, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "sim", version, about = "Cavity-induced asymmetric Rydberg blockade simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transition frequencies, dipole elements and cavity couplings.
    Dipole(Common),
    /// Eigen-potentials of the atom-cavity Hamiltonian (CSV).
    Potentials(Common),
    /// No-jump evolution under the pulse sequence (CSV + JSON).
    Evolve(Common),
    /// No-jump runs over a grid of pulse widths.
    Sweep(Common),
    /// Monte-Carlo wavefunction ensemble.
    Mc(Common),
    /// Dark-state algebra and adiabatic-following check.
    Dark(Common),
    /// Run whatever mode the config names.
    Run(Common),
    /// Dump the dynamics basis as JSON lines.
    Basis(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file, or `preset:<name>` for a bundled one.
    #[arg(long)]
    config: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    traj: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = match cli.command {
        Command::Dipole(c) => (Some(Mode::Dipole), c),
        Command::Potentials(c) => (Some(Mode::Potentials), c),
        Command::Evolve(c) => (Some(Mode::Evolve), c),
        Command::Sweep(c) => (Some(Mode::Sweep), c),
        Command::Mc(c) => (Some(Mode::Mc), c),
        Command::Dark(c) => (Some(Mode::Dark), c),
        Command::Run(c) => (None, c),
        Command::Basis(c) => {
            return finish(load(&c).and_then(|cfg| cmd_basis(&cfg, &c.out)).map(|p| {
                serde_json::json!({ "basis": p })
            }))
        }
    };
    let result = load(&common).and_then(|cfg| run_mode(mode.unwrap_or(cfg.mode), &cfg, &common.out));
    finish(result)
}

fn load(c: &Common) -> cavity_blockade::Result<RunConfig> {
    let mut cfg = match c.config.strip_prefix("preset:") {
        Some(name) => RunConfig::preset(name)?,
        None => RunConfig::load(&c.config)?,
    };
    Overrides { seed: c.seed, workers: c.workers, trajectories: c.traj }.apply(&mut cfg);
    Ok(cfg)
}

fn finish(result: cavity_blockade::Result<serde_json::Value>) -> ExitCode {
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_NUMERICAL })
        }
    }
}
