//! `plateau`: command-line front end for the plateau-core solvers.

mod commands;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

/// Seed used when neither `--seed` nor the scene gives one.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Parser, Debug)]
#[command(name = "plateau", version, about = "Discrete experiments around Plateau's problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Scene file (JSON).
    pub scene: PathBuf,
    /// Seed for every randomized step; overrides the scene's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the report and artifacts; overrides the scene's output block.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimize the boundary energy and compare with the harmonic extension's area.
    Douglas(Common),
    /// Area descent of the scene's initial surface with sliding boundary.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Write an OBJ snapshot every N accepted steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// Exact mass or size minimization over integer chains.
    ChainSolve(Common),
    /// Check which boundary cycles bound in a candidate complex.
    Homology(Common),
    /// Project the scene's input set onto the grid's 2-skeleton.
    FfProject(Common),
    /// Minimize a face set by collapses and flips inside the safe region.
    GridMin(Common),
    /// Covering estimate of the Hausdorff measure of a sample set.
    Measure(Common),
    /// Analytic reference values for two-circle configurations and cones.
    Oracle(Common),
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PLATEAU_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::usage(format!("PLATEAU_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(CliError::usage("PLATEAU_THREADS must be a positive integer, got `0`"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::internal(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Douglas(c) => commands::douglas(&c),
        Command::Evolve { common, snapshot_every } => commands::evolve(&common, snapshot_every),
        Command::ChainSolve(c) => commands::chain_solve(&c),
        Command::Homology(c) => commands::homology(&c),
        Command::FfProject(c) => commands::ff_project(&c),
        Command::GridMin(c) => commands::grid_min(&c),
        Command::Measure(c) => commands::measure(&c),
        Command::Oracle(c) => commands::oracle(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return CliError::usage(e.to_string().trim_end()).report();
        }
    };
    match run(cli) {
        Ok(report) => {
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => e.report(),
    }
}
