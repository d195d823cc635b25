#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status when a residual exceeds its tolerance.
const EXIT_VERIFY: u8 = 2;
/// Exit status for usage, input and I/O errors.
const EXIT_USAGE: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "lct-numra", version)]
#[command(about = "Linear canonical transforms, chirp-modulated multiresolutions and wavelet packets")]
struct Cli {
    /// JSON run configuration; flags given on the command line override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for default output paths
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Family {
    /// Matrix as `a,b,c,d`, `fourier`, `frft:θ` or `fresnel:b`
    #[arg(long)]
    matrix: Option<String>,
    /// Dilation parameter N (dilation factor 2N)
    #[arg(long = "N", id = "big_n")]
    n: Option<u32>,
    /// Odd shift numerator r of the spectrum {2n, 2n + r/N}
    #[arg(long)]
    r: Option<u32>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Lower end of the sampled time range
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    /// Upper end of the sampled time range
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    /// Samples per finest Haar cell
    #[arg(long)]
    refine: Option<usize>,
    /// Largest dilation level represented exactly on the grid
    #[arg(long)]
    max_level: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a parameter matrix
    Matrix {
        #[arg(long)]
        matrix: Option<String>,
        /// Report a non-unimodular matrix as a warning instead of a failure
        #[arg(long)]
        allow_nonunimodular: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Forward or inverse transform of a sampled signal
    Lct {
        direction: Direction,
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Fast)]
        method: MethodArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Inverse only: take the output time grid from this signal file
        #[arg(long)]
        like: Option<PathBuf>,
        /// Inverse only: first output time when `--like` is absent
        #[arg(long, allow_hyphen_values = true)]
        t_min: Option<f64>,
    },
    /// Explicit Haar family: scaling function, wavelets, filters and their verification
    Haar {
        #[command(flatten)]
        family: Family,
        #[command(flatten)]
        grid: GridArgs,
        /// Filter samples per half period
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Scaling function from a low-pass filter by the infinite product
    Cascade {
        /// Filter CSV or bank directory (the low-pass filter is used)
        #[arg(long)]
        filters: PathBuf,
        /// Number of product factors
        #[arg(long = "J", id = "depth", default_value_t = 40)]
        depth: usize,
        /// Bound on the truncation tail over the sampled band
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 16)]
        alias_terms: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check orthonormality and scaling conditions of filters
    Verify {
        /// Filter CSV or bank directory
        #[arg(long, required_unless_present = "printed")]
        filters: Option<PathBuf>,
        /// Report on the printed N = 2 wavelets for M = (0, 1, 2, -1) instead
        #[arg(long, conflicts_with = "filters")]
        printed: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Wavelet packets
    Packets {
        #[command(subcommand)]
        action: PacketAction,
    },
    /// Orthogonal projection onto a Haar approximation space
    Project {
        #[command(flatten)]
        family: Family,
        #[arg(long = "in")]
        input: PathBuf,
        /// Level j of the space V_j
        #[arg(long, allow_hyphen_values = true)]
        j: i32,
        /// Translation window `lo,hi`; defaults to the range the signal needs
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        coefficients: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct PacketArgs {
    /// Bank directory
    #[arg(long)]
    filters: PathBuf,
    /// Matrix used for the chirped translates
    #[arg(long)]
    matrix: Option<String>,
    /// Largest packet index
    #[arg(long)]
    n_max: u64,
    /// Scaling function to refine from; without it packets are synthesized
    #[arg(long)]
    phi: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    depth: usize,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Subcommand, Debug)]
enum PacketAction {
    /// Write W_0 .. W_nmax as CSV
    Gen {
        #[command(flatten)]
        args: PacketArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Gram matrix of the chirped packet translates
    Gram {
        #[command(flatten)]
        args: PacketArgs,
        /// Translation window `lo,hi`
        #[arg(long, allow_hyphen_values = true, default_value = "-4,4")]
        window: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Fwd,
    Inv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Direct,
    Fast,
}

/// A check ran to completion and some residual exceeded its tolerance.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("LCT_NUMRA_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("LCT_NUMRA_THREADS must be a non-negative integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match init_threads().and_then(|_| commands::run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<VerificationFailed>().is_some() {
                ExitCode::from(EXIT_VERIFY)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
