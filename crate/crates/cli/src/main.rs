//! Experiment runner: graph ingestion or generation, protocol selection,
//! seeded sweeps, and CSV/JSON report emission.
//!
//! Exit codes: 0 success, 2 configuration error, 3 protocol invariant fault.

mod report;
mod runs;

use clap::{Parser, Subcommand, ValueEnum};
use distcycle::Fault;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "distcycle",
    version,
    about = "Congested Clique / CONGEST cycle experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    God,
    Priority,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Detector {
    Light,
    Heavy,
    Both,
}

#[derive(clap::Args)]
pub struct CommonArgs {
    /// Edge-list file ("n m" header, "u v" lines, '#' comments).
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generator spec, e.g. er:n=64,p=0.2 | cycle:n=9 | petersen | planted:n=40,len=6,p=0.05
    #[arg(long)]
    gen: Option<String>,
    /// Root seed; every emitted record carries it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Clique +1 girth approximation versus the brute-force oracle.
    GirthApprox {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Partition-tree subgraph listing versus the enumeration oracle.
    List {
        #[command(flatten)]
        common: CommonArgs,
        /// Pattern: k3, c4, p4, ... or edges:p;a-b,c-d
        #[arg(long)]
        pattern: String,
    },
    /// Turán-gated C_{2k} detection in the clique.
    DetectClique {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: usize,
        /// Gate constant (the cited bound uses 17).
        #[arg(long, default_value_t = 17.0)]
        gate_const: f64,
    },
    /// CONGEST C_{2k} detection macro-trial sweep.
    DetectCongest {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Detector::Both)]
        detector: Detector,
        /// Macro trials (independent detector invocations).
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Mode::God)]
        mode: Mode,
        /// Light trial budget override.
        #[arg(long)]
        light_budget: Option<u64>,
        /// Heavy iteration budget override.
        #[arg(long)]
        heavy_budget: Option<u64>,
    },
    /// CONGEST exact girth with phase trace.
    GirthCongest {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// C6 -> directed-triangle reduction; emits the directed edge list and
    /// the equivalence verdict.
    Reduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Heavy-C6 iterations before reducing.
        #[arg(long, default_value_t = 0)]
        heavy_budget: u64,
    },
    /// Brute-force oracles only.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Also count instances of a pattern.
        #[arg(long)]
        pattern: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GirthApprox { common } => runs::girth_approx(&common),
        Command::List { common, pattern } => runs::list(&common, &pattern),
        Command::DetectClique {
            common,
            k,
            gate_const,
        } => runs::detect_clique(&common, k, gate_const),
        Command::DetectCongest {
            common,
            k,
            detector,
            trials,
            mode,
            light_budget,
            heavy_budget,
        } => runs::detect_congest(
            &common,
            k,
            detector,
            trials,
            mode,
            light_budget,
            heavy_budget,
        ),
        Command::GirthCongest { common } => runs::girth_congest(&common),
        Command::Reduce {
            common,
            heavy_budget,
        } => runs::reduce(&common, heavy_budget),
        Command::Oracle { common, pattern } => runs::oracle(&common, pattern.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub enum CliError {
    Config(String),
    Fault(Fault),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Fault(fault) => write!(f, "{fault}"),
        }
    }
}

impl From<Fault> for CliError {
    fn from(fault: Fault) -> Self {
        match fault {
            Fault::Precondition(msg) => CliError::Config(msg),
            other => CliError::Fault(other),
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Config(_) => 2,
        CliError::Fault(_) => 3,
    }
}
