//! `chandef`: channel deficiency, unique information and bottleneck curves
//! from JSON instance files.
//!
//! Exit status: 0 on success, 2 when an input fails to parse or validate, 3
//! when the result contains an infinite value.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chandef", version, about = "Channel deficiency, unique information and bottleneck curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run every solver on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Clone, Copy)]
#[group(multiple = false)]
struct Format {
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Emit CSV instead of a table.
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Deficiency δ^π(d, κ) of a decoder with respect to a channel.
    Deficiency {
        /// Decoder d: channel from Z to Y.
        #[arg(long, required_unless_present = "joint")]
        decoder: Option<PathBuf>,
        /// Channel κ from X to Y.
        #[arg(long, required_unless_present = "joint")]
        channel: Option<PathBuf>,
        /// Input distribution π on X.
        #[arg(long, required_unless_present = "joint")]
        prior: Option<PathBuf>,
        /// Joint (Y, X, Z): uses d = P_{Y|Z}, κ = P_{Y|X}, π = P_X.
        #[arg(long, conflicts_with_all = ["decoder", "channel", "prior"])]
        joint: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[command(flatten)]
        format: Format,
    },
    /// Decides whether κ = d ∘ e for some encoder e.
    Blackwell {
        #[arg(long)]
        decoder: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also print the witness encoder when one exists.
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        format: Format,
    },
    /// Classical and deficiency-induced information decompositions.
    Pid {
        /// Joint (Y, X, Z).
        #[arg(long)]
        joint: PathBuf,
        #[arg(long, value_enum, default_value_t = PidKindArg::Both)]
        kind: PidKindArg,
        /// Certified tolerance of the unique-information solver, in bits.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        format: Format,
    },
    /// Restricted-risk gap of log-loss and the deficiency cross-check.
    Riskgap {
        #[arg(long, required_unless_present = "joint")]
        prior: Option<PathBuf>,
        #[arg(long, required_unless_present = "joint")]
        channel: Option<PathBuf>,
        #[arg(long, required_unless_present = "joint")]
        decoder: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["decoder", "channel", "prior"])]
        joint: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        format: Format,
    },
    /// Information bottleneck curve of a pair joint P_XY.
    IbCurve {
        /// `joint2` with rows X and columns Y, or a `joint3` (its (X, Y) marginal).
        #[arg(long)]
        joint: PathBuf,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Deficiency bottleneck curve of (π, κ).
    DbCurve {
        #[arg(long, required_unless_present = "joint")]
        prior: Option<PathBuf>,
        #[arg(long, required_unless_present = "joint")]
        channel: Option<PathBuf>,
        /// `joint2` with rows X and columns Y, or a `joint3`.
        #[arg(long, conflicts_with_all = ["channel", "prior"])]
        joint: Option<PathBuf>,
        /// Comma-separated alternation schedules: `oneshot` or `seq:k`.
        #[arg(long, default_value = "oneshot")]
        schedule: String,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Paired VDB/VIB Monte Carlo estimates over a grid of sample counts.
    Estimate {
        /// `samples` instance of (x, y) pairs.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        encoder: PathBuf,
        #[arg(long)]
        decoder: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3,6,12")]
        m_grid: Vec<usize>,
        /// Data points per batch; defaults to the data size.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        batches: usize,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// `uniform`, `marginal`, or a `prob_vector` file.
        #[arg(long, default_value = "uniform")]
        reference: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        format: Format,
    },
}

#[derive(Args)]
struct CurveArgs {
    /// Comma-separated β values, or `log:lo:hi:n`.
    #[arg(long, default_value = "log:1e-4:1:30")]
    beta_grid: String,
    /// |Z|; defaults to |X|.
    #[arg(long)]
    z_card: Option<usize>,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also write the curve as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PidKindArg {
    Classical,
    Deficiency,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(commands::Outcome::Finite) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Degenerate) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
