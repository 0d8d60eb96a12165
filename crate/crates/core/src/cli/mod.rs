//! Command-line front end: manifest ingestion, command dispatch, report
//! serialization, and the seeded random-structure generators used by the
//! property suites.

pub mod manifest;
pub mod random;
pub mod report;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use manifest::load_manifest;
use run::{run, run_random_verify, CommandKind, Pipeline, RunError, RunOutcome};

#[derive(Parser)]
#[command(
    name = "acmnp",
    version,
    about = "Spin-coefficient analysis and classification of 3D almost contact metric structures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args)]
pub struct CommonArgs {
    /// Manifest file (.acm)
    pub manifest: Option<PathBuf>,
    /// Write the structured report to this path as canonical JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Override the manifest grid resolution (points per axis)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Override the manifest tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random-structure seed (verify only; replaces the manifest)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random-structure amplitude (with --seed)
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    /// Suppress the text report on stdout
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Sample the five spin coefficients over the grid
    Spin(CommonArgs),
    /// Classify the structure (geodesic/shear-free/normal/contact/...)
    Classify(CommonArgs),
    /// Test the eta-Einstein condition (requires kappa = 0)
    #[command(name = "eta-einstein")]
    EtaEinstein(CommonArgs),
    /// Extract (k, mu, nu) data (requires a contact metric structure)
    Kmunu(CommonArgs),
    /// Run the identity residual suite (or, with --seed, on a random structure)
    Verify(CommonArgs),
    /// Integrate the Reeb flow and check the Raychaudhuri equations
    Orbit(CommonArgs),
    /// Full report: classification, eta-Einstein, (k,mu,nu), identities, fields
    Report(CommonArgs),
}

impl Command {
    fn split(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Spin(a) => (CommandKind::Spin, a),
            Command::Classify(a) => (CommandKind::Classify, a),
            Command::EtaEinstein(a) => (CommandKind::EtaEinstein, a),
            Command::Kmunu(a) => (CommandKind::Kmunu, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Orbit(a) => (CommandKind::Orbit, a),
            Command::Report(a) => (CommandKind::Report, a),
        }
    }
}

/// Exit codes: 0 all checks pass, 1 check or gate failure, 2 input error.
pub fn main_impl(cli: Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let outcome = execute(kind, args);
    match outcome {
        Ok(out) => {
            if let Some(path) = &args.json {
                if let Err(e) = std::fs::write(path, out.value.to_canonical_json()) {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return 2;
                }
            }
            if !args.quiet {
                print!("{}", out.text);
            }
            if out.pass {
                0
            } else {
                1
            }
        }
        Err(RunError::Gate(msg)) => {
            eprintln!("refused: {msg}");
            1
        }
        Err(RunError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn execute(kind: CommandKind, args: &CommonArgs) -> Result<RunOutcome, RunError> {
    if let Some(seed) = args.seed {
        if kind != CommandKind::Verify {
            return Err(RunError::Input(
                "--seed is only supported by the verify command".into(),
            ));
        }
        return run_random_verify(
            seed,
            args.amplitude,
            args.grid.unwrap_or(5),
            args.tol.unwrap_or(1e-6),
        );
    }
    let path = args
        .manifest
        .as_ref()
        .ok_or_else(|| RunError::Input("missing manifest path (or --seed for verify)".into()))?;
    let mut manifest = load_manifest(path).map_err(|e| RunError::Input(e.to_string()))?;
    if let Some(n) = args.grid {
        if n < 2 {
            return Err(RunError::Input("grid must be >= 2 per axis".into()));
        }
        manifest.grid_n = n;
    }
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(RunError::Input("tol must be positive".into()));
        }
        manifest.tol = t;
    }
    let pipeline = Pipeline::build(manifest)?;
    run(kind, &pipeline)
}
