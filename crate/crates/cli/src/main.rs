//! Batch entry point tying the pipeline together: mesh generation, Betti
//! numbers, Hodge decomposition, gauge fixing, spectral evolution, state
//! construction and verification.
//!
//! Exit codes: 0 all checks pass, 1 module error or failed check, 2 config
//! parse failure. Module errors print one machine-parseable line
//! `ERROR,<code>,<message>` to stderr.

mod config;
mod pipeline;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use config::{load_config, parse_mesh_arg};
use pipeline::{CliError, CliResult, EvolveArgs, Session, VerifyArgs};

#[derive(Parser)]
#[command(name = "hodgemax", version, about = "Discrete exterior calculus pipeline for Maxwell fields on compact surfaces")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// JSON run configuration (defaults apply when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Verification seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Verification trial count (overrides the config)
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Infrared regularization mass (overrides the config)
    #[arg(long, global = true)]
    mu: Option<f64>,

    /// Suppress progress notes (artifacts and reports still written)
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured mesh, validate it and write mesh.json
    MeshGen,
    /// Print per-degree Betti numbers and spectral gaps as CSV
    Betti,
    /// Hodge-decompose a seeded random 1-cochain and verify the split
    Decompose,
    /// Fix the Cauchy radiation gauge on constraint data
    GaugeFix {
        /// MaxwellData file to fix (seeded random constraint data if absent)
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Spectrally evolve Maxwell data and record energies and residuals
    Evolve {
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated Sobolev exponents for the energy monitor
        #[arg(long, value_delimiter = ',')]
        sobolev_grid: Option<Vec<f64>>,
        /// MaxwellData file to evolve (seeded gauge-fixed data if absent)
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Assemble the state operators and write them as JSON matrices
    BuildState {
        /// Mesh spec `torus:nx,ny,lx,ly` | `icosphere:s,r` | `circle:n,len`
        /// or a mesh JSON path (overrides the config)
        #[arg(long)]
        mesh: Option<String>,
    },
    /// Run the state verification battery and write report.csv
    VerifyState {
        /// JSON file mapping check names to threshold overrides
        #[arg(long)]
        tolerances: Option<PathBuf>,
    },
    /// Full pipeline: mesh-gen, betti, decompose, gauge-fix, evolve,
    /// build-state; writes a combined report.csv
    All,
}

fn run(cli: Cli) -> CliResult<bool> {
    let mut config = load_config(cli.global.config.as_deref()).map_err(CliError::Config)?;
    if let Some(out) = cli.global.out {
        config.out = out;
    }
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.global.trials {
        config.trials = trials;
    }
    if let Some(mu) = cli.global.mu {
        if mu <= 0.0 {
            return Err(CliError::Config(format!("mu must be positive, got {mu}")));
        }
        config.mu = mu;
    }
    let quiet = cli.global.quiet;

    let rows = match cli.command {
        Command::MeshGen => pipeline::cmd_mesh_gen(&config, quiet)?,
        Command::Betti => pipeline::cmd_betti(&Session::open(config, quiet)?, true)?,
        Command::Decompose => pipeline::cmd_decompose(&Session::open(config, quiet)?)?,
        Command::GaugeFix { input } => {
            pipeline::cmd_gauge_fix(&Session::open(config, quiet)?, input.as_deref(), true)?
        }
        Command::Evolve {
            t0,
            t1,
            samples,
            sobolev_grid,
            input,
        } => pipeline::cmd_evolve(
            &Session::open(config, quiet)?,
            &EvolveArgs {
                t0,
                t1,
                samples,
                sobolev_grid,
                input,
            },
        )?,
        Command::BuildState { mesh } => {
            if let Some(spec) = mesh {
                config.mesh = parse_mesh_arg(&spec).map_err(CliError::Config)?;
            }
            let mu = cli.global.mu;
            pipeline::cmd_build_state(&Session::open(config, quiet)?, mu)?
        }
        Command::VerifyState { tolerances } => pipeline::cmd_verify_state(
            &Session::open(config, quiet)?,
            &VerifyArgs {
                trials: cli.global.trials,
                seed: cli.global.seed,
                tolerances,
            },
        )?,
        Command::All => pipeline::cmd_all(&Session::open(config, quiet)?)?,
    };

    Ok(rows.iter().all(|r| r.passed))
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => std::process::exit(0),
        Ok(false) => {
            eprintln!("ERROR,check_failed,one or more verification checks failed");
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("ERROR,{},{}", e.code(), e.message());
            std::process::exit(e.exit_code());
        }
    }
}
