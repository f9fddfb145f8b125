use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "adam-dynamics", version, about = "Batch-mode Adam as a discrete dynamical system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate Adam from an initial state and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Report a 2-cycle (or a period-q orbit) with its stability as JSON.
    Cycle(CycleArgs),
    /// Sweep the learning rate and write an orbit diagram as CSV.
    Sweep(SweepArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
    /// Re-run a manifest written by `simulate` or `sweep`.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn is_on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Log,
    Linear,
}

/// Hyperparameters, objective and start state shared by `simulate` and
/// `sweep`. Later sources override earlier ones: preset, `--params`, flags.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Reference setup: 1, 2, 3 or multidim.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file with any of alpha, beta1, beta2, epsilon, c, matrix, b, x0.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Scalar objective ½cw².
    #[arg(long, conflicts_with = "matrix")]
    pub c: Option<f64>,
    /// JSON file holding C as a list of rows, or {"C": rows, "b": [...], "a": x}.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Initial state as m,v,w (n = 1) or all m, then v, then w; `eps` is
    /// machine epsilon.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, value_enum)]
    pub bias_correction: Option<Toggle>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub record_every: u64,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Manifest destination; defaults to `<out>.manifest.json` when `--out` is set.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CycleArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta1: f64,
    #[arg(long)]
    pub beta2: f64,
    #[arg(long, conflicts_with = "matrix")]
    pub c: Option<f64>,
    /// Objective matrix file (Newton search only).
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Number of log-spaced continuation steps up to `--epsilon`.
    #[arg(long, default_value_t = 10)]
    pub continuation_steps: usize,
    /// JSON state {"m": [...], "v": [...], "w": [...]} to start Newton from.
    #[arg(long, value_name = "FILE")]
    pub newton_seed: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub period: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum, default_value = "log")]
    pub grid: GridKind,
    #[arg(long)]
    pub transient: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub period_tol: Option<f64>,
    #[arg(long)]
    pub q_max: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Manifest destination; defaults to `<out>.manifest.json`, or
    /// `sweep.manifest.json` when writing to stdout.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// closed-form, jacobian, invariance, decay or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here instead of their recorded paths.
    #[arg(long, value_name = "DIR", conflicts_with = "check")]
    pub out_dir: Option<PathBuf>,
    /// Compare against the recorded files instead of writing.
    #[arg(long)]
    pub check: bool,
}
