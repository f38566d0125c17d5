use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gdtau::cli::{self, Command, Options};

#[derive(Parser, Debug)]
#[command(name = "gdtau", version, about = "Tau functions of Gelfand-Dickey hierarchies as block Toeplitz determinants")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "gdtau.toml")]
    config: PathBuf,
    /// Output directory; beats GDTAU_OUT_DIR and the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override for every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for grid sweeps and the verify suite.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the randomized property checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Run the invariant suite and print the pass/fail table.
    Verify,
    /// Sweep the time grid and write tau.csv.
    Tau,
    /// Write the D_N/G^N convergence table.
    Converge,
    /// Wiener-Hopf factors and certificate at the base times.
    Factorize,
    /// Burchnall-Chaundy report and C(z) coefficients.
    Spectral,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Verify => Command::Verify,
        Cmd::Tau => Command::Tau,
        Cmd::Converge => Command::Converge,
        Cmd::Factorize => Command::Factorize,
        Cmd::Spectral => Command::Spectral,
    };
    let opts = Options {
        config: args.config,
        out: args.out,
        tol: args.tol,
        threads: args.threads,
        seed: args.seed,
    };
    ExitCode::from(cli::run(command, &opts) as u8)
}
