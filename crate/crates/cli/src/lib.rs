//! Command-line harness: `verify`, `bench` and `trace`.
//!
//! Exit status: 0 when everything passes, 1 on a mismatch, 2 on a usage or
//! configuration error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use yggsum::nmtree::DEFAULT_TABLE_CAP;

pub mod bench;
pub mod trace;
pub mod verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Mismatch = 1,
    Usage = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Nmtree,
    Fenwick,
    Binset,
    Oracle,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Nmtree => "nmtree",
            Structure::Fenwick => "fenwick",
            Structure::Binset => "binset",
            Structure::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "yggsum",
    version,
    about = "Prefix sums on a simulated shared-bit memory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run oracle-equivalence and invariant suites against a structure.
    Verify(RunConfig),
    /// Measure wall-clock and model-cost per operation.
    Bench(BenchConfig),
    /// Replay an operation script and dump the structure after each step.
    Trace(TraceConfig),
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, value_enum, default_value_t = Structure::Nmtree)]
    pub structure: Structure,
    /// Array length.
    #[arg(long = "N", default_value_t = 64)]
    pub len: u64,
    /// Universe size (modulus).
    #[arg(long = "M", default_value_t = 7)]
    pub modulus: u64,
    /// Fold rounds before the table lookup (default: no table).
    #[arg(long)]
    pub iota: Option<u32>,
    /// Largest table index width in bits.
    #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
    pub table_cap: u32,
    #[arg(long, default_value_t = 10_000)]
    pub ops: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Probability that a generated op is an update.
    #[arg(long, default_value_t = 0.5)]
    pub update_ratio: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BenchConfig {
    #[arg(long, value_enum, default_value_t = Structure::Nmtree)]
    pub structure: Structure,
    /// Array lengths, comma separated.
    #[arg(long = "N", value_delimiter = ',', default_values_t = [4u64, 16, 64, 1024])]
    pub lens: Vec<u64>,
    #[arg(long = "M", default_value_t = 7)]
    pub modulus: u64,
    #[arg(long)]
    pub iota: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
    pub table_cap: u32,
    #[arg(long, default_value_t = 10_000)]
    pub ops: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub update_ratio: f64,
    /// Omit wall-clock timings so output depends only on the config.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TraceConfig {
    #[arg(long, value_enum, default_value_t = Structure::Nmtree)]
    pub structure: Structure,
    #[arg(long = "N", default_value_t = 4)]
    pub len: u64,
    #[arg(long = "M", default_value_t = 8)]
    pub modulus: u64,
    #[arg(long)]
    pub iota: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
    pub table_cap: u32,
    /// Script file; standard input when absent or `-`.
    #[arg(long)]
    pub script: Option<PathBuf>,
}

/// Quote a CSV field when it needs it.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn read_script(path: Option<&PathBuf>) -> io::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

/// Dispatch a parsed command line, writing results to `out`.
pub fn run(cli: &Cli, out: &mut impl Write) -> Status {
    let result = match &cli.command {
        Command::Verify(cfg) => verify::run(cfg, out),
        Command::Bench(cfg) => bench::run(cfg, out),
        Command::Trace(cfg) => match read_script(cfg.script.as_ref()) {
            Ok(text) => trace::run(cfg, &text, out),
            Err(e) => {
                eprintln!("error: cannot read script: {e}");
                Ok(Status::Usage)
            }
        },
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Status::Usage
    })
}
