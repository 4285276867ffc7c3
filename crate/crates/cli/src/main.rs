//! `gnc-lasso`: fit, tune, simulate and diagnose Gaussian graphical models
//! with network cohesion.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gnc_lasso::GncError;

#[derive(Debug, Parser)]
#[command(name = "gnc-lasso", version, about = "Graphical lasso with network cohesion")]
pub struct Cli {
    /// Seed for every random choice (CV folds, simulation draws).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the two-stage model and write it as JSON.
    Fit(FitArgs),
    /// Score a grid of smoothing strengths by CV or GCV.
    Tune(TuneArgs),
    /// Run the simulation harness and write an ROC report.
    Simulate(SimulateArgs),
    /// ROC of a fitted lambda path against a known edge set.
    Roc(RocArgs),
    /// Spectrum, algebraic connectivity and effective dimension of a network.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Data matrix, one row per node.
    #[arg(long)]
    pub data: PathBuf,
    /// Network edge list over the rows of the data.
    #[arg(long)]
    pub edges: PathBuf,
    /// Use the data as given instead of centering and scaling each column.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    /// Smoothing strength; tuned when absent.
    #[arg(long, conflicts_with_all = ["gcv", "cv_folds"])]
    pub alpha: Option<f64>,
    /// Tune alpha by generalized cross-validation instead of CV.
    #[arg(long)]
    pub gcv: bool,
    /// Folds for cross-validating alpha.
    #[arg(long, default_value_t = 10, conflicts_with = "gcv")]
    pub cv_folds: usize,
    /// Comma-separated alpha grid (default: 40 log-spaced values in [1e-2, 1e4]).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    /// Glasso penalty.
    #[arg(long, conflicts_with = "target_edges")]
    pub lambda: Option<f64>,
    /// Choose lambda to give this many edges.
    #[arg(long)]
    pub target_edges: Option<usize>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[arg(long, default_value = "tuning.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Nodes; without --edges this must be a square and a lattice is used.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Observation network instead of the lattice.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    /// Share of each mean column coming from the network eigenvectors.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Eigenvector pool size for the means.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 1.6)]
    pub snr: f64,
    /// Edge probability of the precision-matrix graph.
    #[arg(long, default_value_t = 0.01)]
    pub edge_prob: f64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Also run the iterative joint estimator (slow).
    #[arg(long)]
    pub iterative: bool,
    /// Directory for report.csv and summary.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    /// True edge set over the variables (edge-list format).
    #[arg(long)]
    pub truth: PathBuf,
    /// Plain glasso on the sample covariance instead of the smoothed residuals.
    #[arg(long)]
    pub plain: bool,
    #[arg(long, default_value_t = 30)]
    pub lambda_count: usize,
    /// Smallest lambda as a fraction of lambda_max.
    #[arg(long, default_value_t = 0.01)]
    pub lambda_ratio: f64,
    #[arg(long, default_value = "roc.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Node count, when isolated trailing nodes are not in the edge list.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<GncError>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
