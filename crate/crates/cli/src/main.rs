//! `summa`: batch runner for the summability laboratory.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use summa::Error;

/// Exit codes past the verdict tri-state (sysexits).
pub mod exit {
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
    pub const SOFTWARE: u8 = 70;
    pub const CANT_CREATE: u8 = 73;
}

#[derive(Parser, Debug)]
#[command(name = "summa", version, about = "Finite-scale checks of ideal convergence and (I,J)-regular matrices")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Truncation scale.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub max_n: u64,
    /// Strictly decreasing epsilon grid, comma separated.
    #[arg(long, global = true, default_value = "0.5,0.1,0.02")]
    pub eps: String,
    #[arg(long, global = true, default_value_t = summa::DEFAULT_ZERO_TOL)]
    pub zero_tol: f64,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report file. Without it the report goes to `$SUMMA_OUT_DIR/<command>.json`
    /// when that is set, else to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "SUMMA_OUT_DIR", hide_env_values = true)]
    pub out_dir: Option<PathBuf>,
    /// Also write checkpoint ratios as CSV (density, limit).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Upper density of a set and its membership in an ideal.
    Density {
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "z")]
        ideal: String,
    },
    /// Ideal limit of a sequence (proposed when --eta is absent).
    Limit {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value = "z")]
        ideal: String,
    },
    /// Silverman-Toeplitz conditions of a matrix.
    Check {
        #[arg(long)]
        matrix: String,
        /// Comma-separated list among S1,S2,S3,T1,T2,T3,T4,sliding.
        #[arg(long, default_value = "S1,S2,S3")]
        cond: String,
        #[command(flatten)]
        matrix_opts: MatrixArgs,
        /// Declared member of I for T3 (repeatable).
        #[arg(long = "e")]
        e: Vec<String>,
        /// Declared dual-filter set for T4 (repeatable).
        #[arg(long)]
        istar: Vec<String>,
        #[arg(long, default_value = "z")]
        i: String,
        #[arg(long, default_value = "z")]
        j: String,
        /// Number of columns for S3.
        #[arg(long, default_value_t = 10)]
        columns: u64,
        /// Column prefix for the sliding condition.
        #[arg(long, default_value_t = 10)]
        sliding_m: u64,
    },
    /// Build the block counterexample A or B.
    Construct {
        /// `A` or `B`.
        #[arg(long)]
        counterexample: String,
        #[arg(long, default_value = "squares")]
        iset: String,
        #[arg(long, default_value_t = summa::constructions::DEFAULT_MAX_BLOCK)]
        max_block: u32,
        /// Check invariants, T2, T3, density of R and block exceedance.
        #[arg(long)]
        verify: bool,
    },
    /// Greedy witness sequence for a failure of T3.
    Witness {
        #[arg(long)]
        matrix: String,
        #[command(flatten)]
        matrix_opts: MatrixArgs,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Permutation criteria against the permutation matrix.
    Permute {
        #[arg(long)]
        perm: String,
        /// Declared members of I (repeatable).
        #[arg(long, default_value = "squares")]
        family: Vec<String>,
        #[arg(long, default_value = "z")]
        i: String,
        #[arg(long, default_value = "z")]
        j: String,
        /// Growth condition weights `g,h` (optional).
        #[arg(long)]
        growth: Option<String>,
        #[arg(long, default_value = "2")]
        alphas: String,
    },
    /// Multiplier check of a bounded sequence, or the inclusion suite.
    Multiplier {
        #[arg(long, required_unless_present_any = ["case", "samples"])]
        seq: Option<String>,
        /// Declared members of I (repeatable).
        #[arg(long, default_value = "squares")]
        family: Vec<String>,
        #[arg(long, default_value = "z")]
        j: String,
        /// JSON file `{sequence, family: [..], idealJ}`.
        #[arg(long, conflicts_with = "seq")]
        case: Option<PathBuf>,
        /// Run the inclusion suite on these bounded samples (`;` separated).
        #[arg(long, conflicts_with_all = ["seq", "case"])]
        samples: Option<String>,
    },
    /// The acceptance battery.
    Suite {
        #[arg(long, default_value_t = summa::suite::SUITE_SEED)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct MatrixArgs {
    /// Enumerated set for counterexample and pick matrices.
    #[arg(long, default_value = "squares")]
    pub iset: String,
    #[arg(long, default_value_t = summa::constructions::DEFAULT_MAX_BLOCK)]
    pub max_block: u32,
    /// Rows of pick-nth / pick-pair (default: maxN).
    #[arg(long)]
    pub rows: Option<u64>,
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) => exit::USAGE,
        Error::Io { .. } => exit::NO_INPUT,
        Error::Consistency(_) => exit::SOFTWARE,
        _ => exit::DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(commands::Failure { code, message }) => {
            eprintln!("summa: {message}");
            ExitCode::from(code)
        }
    }
}
