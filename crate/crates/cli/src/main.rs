use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Semiparametric density estimation with a Gaussian parametric start.
///
/// Index guidance: `auto2` and `auto3` suit densities that are somewhat
/// smooth, `auto1` suits densities that are rather kurtotic.
#[derive(Debug, Parser)]
#[command(name = "l2dens", version, about, long_about)]
struct Cli {
    /// TOML file with default settings; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "L2DENS_THREADS", value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a density curve and write it as CSV.
    Estimate(EstimateArgs),
    /// Run an index selector and report its trace.
    Select(SelectArgs),
    /// Asymptotic bias-roughness ratio tables for the test densities.
    RatioTable(RatioArgs),
    /// Monte Carlo MISE comparison over a bandwidth grid.
    Simulate(SimulateArgs),
    /// List the built-in test densities.
    Zoo(ZooArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Sample file: one value per line or a single-column CSV.
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Index: a number, hj, ll, hg, auto1, auto2 or auto3 [default: hg].
    #[arg(long, short, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Bandwidth: a positive number or `auto` [default: auto].
    #[arg(long, short)]
    bandwidth: Option<String>,
    /// Evaluation grid `min:max:count` [default: data range padded].
    #[arg(long, short, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Output file [default: stdout].
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// 1 = direct, 2 = single AMSRE bandwidth, 3 = separate AMSE bandwidths.
    #[arg(long, short)]
    method: Option<u8>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RatioArgs {
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Density id: mw1..mw15 or sn<lambda>.
    #[arg(long, short)]
    density: Option<String>,
    /// Sample size [default: 200, or 500 with --long].
    #[arg(long, short)]
    n: Option<usize>,
    /// Replications [default: 300, or 1000 with --long].
    #[arg(long, short)]
    reps: Option<usize>,
    #[arg(long, short)]
    seed: Option<u64>,
    /// Comma-separated estimators, e.g. `kde,hj,ll,hg,alpha_o,auto2`.
    #[arg(long, short)]
    estimators: Option<String>,
    /// Bandwidth search interval `lo:hi` [default: 0.1 to 5 times a normal reference].
    #[arg(long)]
    h_range: Option<String>,
    /// Full-scale defaults (n = 500, 1000 replications).
    #[arg(long)]
    long: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ZooArgs {
    /// Write the component table as CSV.
    #[arg(long)]
    dump: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
