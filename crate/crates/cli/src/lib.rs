//! Command-line front end for the vector soft-processor simulator.
//!
//! File formats live in [`config_file`], [`data_file`] and [`report`];
//! [`commands`] implements each subcommand against them.

pub mod commands;
pub mod config_file;
pub mod data_file;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

/// A failed command. `Input` covers bad files and arguments; `Fault`
/// covers programs that assemble but do not run to completion.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Fault(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Fault(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vproc", version, about = "Vector soft-processor simulator and design-space explorer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble and validate a program, printing a numbered listing.
    Asm {
        program: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print nothing on success.
        #[arg(long)]
        check: bool,
    },
    /// Simulate a program and write a JSON report.
    Run {
        program: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Word range `START..END` to copy into the report; defaults to the
        /// kernel output region.
        #[arg(long)]
        observe: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a program under several unit mixes and write a CSV.
    Sweep {
        program: PathBuf,
        /// `A-M-D` triples separated by commas, or `sym:N,N,...`.
        #[arg(long)]
        mix: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare tiled, sequential and vector implementations of the kernel.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project multi-core throughput and whole-application speedup.
    Project {
        #[arg(long, requires_all = ["slices", "budget"])]
        latency: Option<u64>,
        #[arg(long, requires = "latency")]
        slices: Option<u64>,
        #[arg(long, requires = "latency")]
        budget: Option<u64>,
        /// Clock in MHz; defaults to the config's `clock_mhz`.
        #[arg(long)]
        clock: Option<f64>,
        #[arg(long, requires = "speedup")]
        fraction: Option<f64>,
        /// Kernel speedup; `inf` for an infinitely fast kernel.
        #[arg(long, requires = "fraction")]
        speedup: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the benchmark kernel, seeded inputs and expected outputs.
    KernelGen {
        #[arg(long, default_value_t = 24)]
        veclen: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Writes `PREFIX.asm`, `PREFIX.csv` and `PREFIX.expected.csv`.
        #[arg(long)]
        out_prefix: PathBuf,
    },
}
