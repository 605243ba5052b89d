//! `nmbench`: command-line harness for the metric, forecasting, FSCIL and
//! QUBO benchmarks.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nmbench_core::ErrorKind;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "nmbench", version, about = "Deterministic benchmark harness")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a Mackey-Glass series and write it to the cache format.
    MgGen(MgGenArgs),
    /// Run one of the benchmark tasks.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Compute static (and optionally workload) metrics of a model file.
    Analyze(AnalyzeArgs),
    /// Generate a maximum-independent-set workload file.
    QuboGen(QuboGenArgs),
    /// Compute a best-known-solution table for a workload grid.
    Bks(BksArgs),
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// Autoregressive Mackey-Glass forecasting.
    Chaotic(ChaoticArgs),
    /// Few-shot class-incremental learning with prototype readouts.
    Fscil(FscilArgs),
    /// Simulated annealing and tabu search on MIS workloads.
    Qubo(QuboArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesFormatArg {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Esn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FscilModeArg {
    Prototypical,
    Frozen,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct MgGenArgs {
    /// Delay parameter.
    #[arg(long)]
    pub tau: f64,
    /// Lyapunov time; required when tau is not one of the tabulated series.
    #[arg(long)]
    pub lyapunov_time: Option<f64>,
    /// Constant history value (tabulated value, or 1.2 for custom tau).
    #[arg(long)]
    pub x0: Option<f64>,
    /// Series length in Lyapunov times.
    #[arg(long, default_value_t = 50)]
    pub duration: usize,
    /// Integration step.
    #[arg(long, default_value_t = nmbench_core::mackeyglass::DEFAULT_DT_INT)]
    pub dt_int: f64,
    /// Discarded transient in Lyapunov times.
    #[arg(long, default_value_t = nmbench_core::mackeyglass::BURN_IN_LYAPUNOV)]
    pub burn_in: f64,
    #[arg(long, value_enum, default_value_t = SeriesFormatArg::Csv)]
    pub format: SeriesFormatArg,
    /// Output path (default: `$NEUROBENCH_DATA_DIR/mg_tau<tau>.<ext>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChaoticArgs {
    #[arg(long)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ModelKind::Esn)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 30)]
    pub instances: usize,
    /// Shift between instance windows in Lyapunov times.
    #[arg(long, default_value_t = 0.5)]
    pub offset: f64,
    /// Base seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Read the series from this file instead of integrating it.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long, default_value_t = 186)]
    pub reservoir_size: usize,
    #[arg(long, default_value_t = 0.11)]
    pub connection_prob: f64,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.9)]
    pub spectral_radius: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta_in: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub lambda: f64,
    #[arg(long, default_value_t = 75)]
    pub washout: usize,
    /// Evaluate the default hyperparameter grid and report the best point.
    #[arg(long)]
    pub grid_search: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct FscilArgs {
    /// Training embeddings CSV (`class_id,t,e_0,...`).
    #[arg(long, requires_all = ["test", "plan"])]
    pub train: Option<PathBuf>,
    #[arg(long, requires = "train")]
    pub test: Option<PathBuf>,
    /// Session plan JSON.
    #[arg(long, requires = "train")]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub base: usize,
    #[arg(long, default_value_t = 5)]
    pub sessions: usize,
    #[arg(long, default_value_t = 10)]
    pub ways: usize,
    #[arg(long, default_value_t = 5)]
    pub shots: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FscilModeArg::Both)]
    pub mode: FscilModeArg,
    /// Timesteps per sample for the temporal prototype variant.
    #[arg(long)]
    pub temporal: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct QuboArgs {
    /// Graph sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [10, 25])]
    pub n: Vec<usize>,
    /// Edge densities, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = nmbench_core::qubo::REFERENCE_DENSITIES)]
    pub density: Vec<f64>,
    /// Seeds as an inclusive range `a..b` or a comma list.
    #[arg(long, default_value = "0..4")]
    pub seeds: String,
    /// Per-run time budgets in seconds, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1])]
    pub timeout: Vec<f64>,
    /// Fixed iteration budget instead of the wall clock.
    #[arg(long)]
    pub iters_mode: Option<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = ["sa".to_string(), "tabu".to_string()])]
    pub solvers: Vec<String>,
    /// BKS table CSV; computed on the fly when absent.
    #[arg(long)]
    pub bks: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    pub format: ReportFormat,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    /// Model description JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Workload JSON `{"samples": [[[x_0, ...], ...], ...]}`.
    #[arg(long)]
    pub workload: Option<PathBuf>,
    /// Seconds between model executions, for the execution rate.
    #[arg(long)]
    pub stride: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct QuboGenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BksArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [10, 25])]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = nmbench_core::qubo::REFERENCE_DENSITIES)]
    pub density: Vec<f64>,
    #[arg(long, default_value = "0..4")]
    pub seeds: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::MgGen(a) => commands::mg_gen(&a),
        Command::Bench(BenchCommand::Chaotic(a)) => commands::bench_chaotic(&a),
        Command::Bench(BenchCommand::Fscil(a)) => commands::bench_fscil(&a),
        Command::Bench(BenchCommand::Qubo(a)) => commands::bench_qubo(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::QuboGen(a) => commands::qubo_gen(&a),
        Command::Bks(a) => commands::bks(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
