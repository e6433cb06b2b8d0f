//! `wigmarg`: state generation, phase-space transforms, reductions and the
//! self-checking invariant suite, driven entirely by files and flags.
//!
//! Exit codes: 0 on success, 1 when an invariant check fails, 2 on input
//! or validation errors.

mod check;
mod gen;
mod ops;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "wigmarg",
    version,
    about = "Phase-space quantum states: generate, transform, reduce, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded state or covariance file.
    Gen(GenArgs),
    /// Run the full invariant suite and write a JSON report.
    Check(CheckArgs),
    /// Reduce a bipartite state over B along both routes.
    Reduce(ReduceArgs),
    /// Wigner-transform a state file.
    Wigner(WignerArgs),
    /// Print a state's purity along two independent routes.
    Purity(PurityArgs),
    /// Purify a density matrix and verify the marginalization identity.
    Purify(PurifyArgs),
}

#[derive(clap::Args)]
struct GridFlags {
    /// Degrees of freedom.
    #[arg(long = "n")]
    n: Option<usize>,
    /// Lattice points per axis (even, >= 8).
    #[arg(long = "N", default_value_t = 32)]
    points: usize,
    /// Lower position bound; defaults to -9*sqrt(hbar).
    #[arg(long)]
    xmin: Option<f64>,
    /// Upper position bound; defaults to +9*sqrt(hbar).
    #[arg(long)]
    xmax: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// A-side degrees of freedom for bipartite states.
    #[arg(long)]
    na: Option<usize>,
    /// B-side degrees of freedom for bipartite states.
    #[arg(long)]
    nb: Option<usize>,
}

#[derive(clap::Args)]
struct GenArgs {
    /// packet | mixed | schmidt | gaussian | two-mode-squeezed
    #[arg(long)]
    kind: String,
    #[command(flatten)]
    grid: GridFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rank of generated mixtures.
    #[arg(long, default_value_t = 3)]
    rank: usize,
    /// Squeezing parameter for two-mode-squeezed covariances.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Isotropic noise added to generated Gaussian covariances,
    /// `Sigma += mix * (hbar/2) * I`.
    #[arg(long, default_value_t = 0.0)]
    mix: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Lattice size for the bipartite equivalence sweep.
    #[arg(long = "N", default_value_t = 32)]
    points: usize,
    /// Multiplier applied to every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol: f64,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Negative control: corrupts one transform inside the suite.
    #[arg(long, hide = true, default_value_t = false)]
    sabotage: bool,
}

#[derive(clap::Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Partition override for state files without one.
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::Args)]
struct WignerArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also emit `x,p,value` CSV at full precision.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PurityArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Lattice size for the discretized route on covariance input;
    /// sized automatically from the covariance when omitted.
    #[arg(long = "N")]
    points: Option<usize>,
}

#[derive(clap::Args)]
struct PurifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Purifying degrees of freedom.
    #[arg(long, default_value_t = 1)]
    nb: usize,
    /// Lattice points; must match the input grid.
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn init_threads() {
    if let Ok(raw) = std::env::var("WIGMARG_THREADS") {
        if let Ok(k) = raw.parse::<usize>() {
            if k > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => gen::run(&args),
        Command::Check(args) => check::run(&args),
        Command::Reduce(args) => ops::reduce(&args),
        Command::Wigner(args) => ops::wigner(&args),
        Command::Purity(args) => ops::purity(&args),
        Command::Purify(args) => ops::purify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
