//! `stablefrac`: command-line access to stable and strongly stable
//! fractional matchings.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails (with a
//! witness in the report), 2 for usage, input and parse errors.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "stablefrac",
    version,
    about = "Stable and strongly stable fractional matchings"
)]
struct Cli {
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Side {
    Firms,
    Workers,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Method {
    Brute,
    Rotations,
}

#[derive(Subcommand)]
enum Command {
    /// Deferred acceptance with one side proposing.
    Solve {
        market: PathBuf,
        #[arg(long, value_enum, default_value = "firms")]
        side: Side,
    },
    /// Feasibility, the per-pair product condition and the vertex test.
    Check { market: PathBuf, fraction: PathBuf },
    /// Ordered decomposition and hull certificate of a strongly stable point.
    Decompose { market: PathBuf, fraction: PathBuf },
    /// Reduced lists and rotations at a stable matching (firm-optimal by default).
    Rotations {
        market: PathBuf,
        /// 0/1 fraction file holding the matching to reduce at.
        #[arg(long)]
        mu: Option<PathBuf>,
    },
    /// Every stable matching.
    StableAll {
        market: PathBuf,
        #[arg(long, value_enum, default_value = "brute")]
        method: Method,
    },
    /// Compare strong stability against hull membership on sampled points.
    Verify {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        market: Option<PathBuf>,
        /// Use a generated market instead of a file.
        #[arg(long, num_args = 4, value_names = ["SEED", "FIRMS", "WORKERS", "QMAX"])]
        random: Option<Vec<u64>>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Sampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a random market.
    Gen {
        seed: u64,
        firms: usize,
        workers: usize,
        qmax: usize,
        /// Probability that an agent lists a given partner.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
}

fn run(cli: &Cli) -> anyhow::Result<report::Report> {
    match &cli.command {
        Command::Solve { market, side } => commands::solve(market, *side),
        Command::Check { market, fraction } => commands::check(market, fraction),
        Command::Decompose { market, fraction } => commands::decompose_cmd(market, fraction),
        Command::Rotations { market, mu } => commands::rotations(market, mu.as_deref()),
        Command::StableAll { market, method } => commands::stable_all(market, *method),
        Command::Verify {
            market,
            random,
            samples,
            seed,
        } => commands::verify(market.as_deref(), random.as_deref(), *samples, *seed),
        Command::Gen {
            seed,
            firms,
            workers,
            qmax,
            density,
        } => commands::gen(*seed, *firms, *workers, *qmax, *density),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            let body = if cli.json {
                let mut s = serde_json::to_string_pretty(&r.to_json()).expect("report serializes");
                s.push('\n');
                s
            } else {
                for d in &r.diagnostics {
                    eprintln!("note: {d}");
                }
                r.text.clone()
            };
            // A closed pipe downstream is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if r.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
