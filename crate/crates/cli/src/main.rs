use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use llgsp_core::io::{
    compat_command, convergence_command, load_config, oracle_compare_command, run_command, Outcome,
    RunConfig,
};

/// Spectral Galerkin solver for the Landau-Lifshitz equation coupled to spin accumulation.
#[derive(Parser)]
#[command(name = "llgsp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration, writing diagnostics.csv and snapshots.
    Run(Common),
    /// Check the order 0 and order 1 compatibility conditions of the initial data.
    CompatCheck(Common),
    /// Compare the spectral solution against the finite-difference oracle.
    OracleCompare(Common),
    /// Run the time-step and mode-count convergence ladders.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    config: PathBuf,
    /// Directory for all outputs (overrides `output_dir`).
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Seed for randomized initial data (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Replace one configuration entry, e.g. `--override dt=5e-5`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Skip the step-size stability guard.
    #[arg(long)]
    unsafe_dt: bool,
}

impl Common {
    fn load(&self) -> llgsp_core::Result<RunConfig> {
        let mut cfg = load_config(&self.config, &self.overrides)?;
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.unsafe_dt {
            cfg.solver.check_stability = false;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, command): (&Common, fn(&RunConfig) -> llgsp_core::Result<Outcome>) =
        match &cli.command {
            Command::Run(c) => (c, run_command),
            Command::CompatCheck(c) => (c, compat_command),
            Command::OracleCompare(c) => (c, oracle_compare_command),
            Command::Convergence(c) => (c, convergence_command),
        };
    match common.load().and_then(|cfg| command(&cfg)) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
