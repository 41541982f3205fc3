mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Exact 1/N expansion coefficients, lattice string trajectories and a Monte Carlo oracle.
#[derive(Parser, Debug)]
#[command(name = "lstr", version)]
pub struct Cli {
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for enumeration and Monte Carlo chains.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tables of a_{i,k}(s) and b_{i,k}(s).
    Coeff(CoeffArgs),
    /// Truncated series f_k(s) at a given beta, with tail and growth bounds.
    Expand(ExpandArgs),
    /// Vanishing trajectories: counts per budget, signed and absolute sums, optional listing.
    Trajectories(TrajectoryArgs),
    /// Monte Carlo estimates on a finite box.
    Mc(McArgs),
    /// Invariant suites.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LoopArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Loop sequence in the loop DSL, e.g. "+1 +2 -1 -2 ; @(3,0) +1 +2 -1 -2".
    #[arg(long = "loop")]
    pub loops: String,
}

#[derive(Args, Debug, Clone)]
pub struct CacheArgs {
    /// Coefficient cache file; defaults to a file under $LATTICE_STRINGS_CACHE_DIR when set.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, env = "LATTICE_STRINGS_CACHE_DIR", hide_env_values = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoeffArgs {
    #[command(flatten)]
    pub target: LoopArgs,
    /// Single order in 1/N.
    #[arg(long, conflicts_with = "kmax")]
    pub k: Option<u32>,
    /// All orders 0..=kmax in 1/N.
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub imax: u32,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    pub which: Which,
    /// Use the recursion over all operations instead of the first-edge one.
    #[arg(long)]
    pub symmetrized: bool,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    A,
    B,
    Both,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub target: LoopArgs,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Exact rational or decimal, e.g. 1/100000000 or 1e-20.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    /// Fixed truncation order; by default the order is chosen from the tail bound.
    #[arg(long)]
    pub imax: Option<u32>,
    /// Largest order tried when choosing automatically.
    #[arg(long, default_value_t = 6)]
    pub icap: u32,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Args, Debug)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub target: LoopArgs,
    /// Number of deformations.
    #[arg(long)]
    pub i: u32,
    /// Genus class a + 2b + c.
    #[arg(long)]
    pub k: u32,
    /// Include one record per trajectory.
    #[arg(long)]
    pub list: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Phi,
    Master,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub target: LoopArgs,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    /// Vertices per side of the cubic box.
    #[arg(long = "box", default_value_t = 8)]
    pub side: usize,
    #[arg(long, default_value_t = 20_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1_000)]
    pub warmup: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Use the loop coordinates as given instead of centering the loops in the box.
    #[arg(long)]
    pub as_is: bool,
    #[arg(long, value_enum, default_value_t = Observable::Phi)]
    pub observable: Observable,
    /// Write the raw measurements as CSV.
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Duality,
    Cross,
    Absolute,
    Rules,
    Bounds,
    Catalan,
    Master,
    Lemmas,
    Pruning,
    All,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Only d = 2 has a built-in corpus.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 8)]
    pub max_length: usize,
    #[arg(long, default_value_t = 3)]
    pub imax: u32,
    #[arg(long, default_value_t = 2)]
    pub kmax: u32,
    /// Beta for the loop-equation residual.
    #[arg(long, default_value = "1/10", allow_hyphen_values = true)]
    pub beta: String,
    /// Seed of the randomized lemma suites.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Applications per randomized suite.
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    /// Largest i + a + b + c for the pruning suite.
    #[arg(long, default_value_t = 3)]
    pub max_budget: u32,
    #[command(flatten)]
    pub cache: CacheArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            emit_error("usage", &e.to_string());
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(value) => {
            let text = serde_json::to_string_pretty(&value).expect("serializable output");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    emit_error("io", &format!("cannot write {}: {e}", path.display()));
                    return ExitCode::from(1);
                }
            }
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            emit_error(e.kind, &e.message);
            ExitCode::from(1)
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    let body = json!({ "error": { "kind": kind, "message": message.trim_end() } });
    println!("{}", serde_json::to_string_pretty(&body).expect("serializable error"));
}
