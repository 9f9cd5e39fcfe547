use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Population-dynamics toolkit: simulate reaction networks, train an
/// abstract trajectory generator, and measure how well it holds up.
#[derive(Debug, Parser)]
#[command(name = "popdyn", version, about)]
pub struct Cli {
    /// JSON run-configuration file; explicit flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a model and print its shape, grid, and invariant checks.
    Validate(ValidateArgs),
    /// Simulate a batch of trajectories into a dataset file.
    Simulate(SimulateArgs),
    /// Build a training or test dataset with the standard sizes.
    MakeDataset(MakeDatasetArgs),
    /// Train the conditional generator on a dataset.
    Train(TrainArgs),
    /// Sample trajectories from trained weights.
    Generate(GenerateArgs),
    /// Score trained weights against a held-out test dataset.
    Evaluate(EvaluateArgs),
    /// Compare per-trajectory cost of simulation and generation.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Exact stochastic simulation.
    Ssa,
    /// Fixed-step tau-leaping.
    Tau,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Built-in model name or model file path.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub grid_dt: Option<f64>,
    #[arg(long)]
    pub grid_h: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in model name or model file path.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub grid_dt: Option<f64>,
    #[arg(long)]
    pub grid_h: Option<usize>,
    /// Number of distinct initial settings.
    #[arg(long)]
    pub n_settings: Option<usize>,
    /// Trajectories per setting.
    #[arg(long)]
    pub k_per_setting: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Leap length for --method tau (at most the grid step).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Role {
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct MakeDatasetArgs {
    /// Built-in model name or model file path.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub grid_dt: Option<f64>,
    #[arg(long)]
    pub grid_h: Option<usize>,
    /// Dataset role; picks the standard sizes unless overridden.
    #[arg(long, value_enum)]
    pub role: Role,
    #[arg(long)]
    pub n_settings: Option<usize>,
    #[arg(long)]
    pub k_per_setting: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset file.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Gradient-penalty coefficient.
    #[arg(long)]
    pub lambda_gp: Option<f64>,
    /// Critic updates per generator update.
    #[arg(long)]
    pub n_critic: Option<usize>,
    /// Generator noise dimension.
    #[arg(long)]
    pub noise_dim: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weights file to write; the training log lands next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Training-log CSV path (default: <out>.train.csv).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Trained weights file.
    #[arg(long)]
    pub weights: PathBuf,
    /// Initial setting as inline JSON {"s0": [...], "theta": [...]}.
    #[arg(long, conflicts_with = "setting_file")]
    pub setting: Option<String>,
    /// File with one such JSON setting object.
    #[arg(long)]
    pub setting_file: Option<PathBuf>,
    /// Number of trajectories to sample.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Round sampled values to whole counts.
    #[arg(long)]
    pub round: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectory JSON file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Trained weights file.
    #[arg(long)]
    pub weights: PathBuf,
    /// Held-out test dataset file.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Permutation rounds for the energy test (min 99).
    #[arg(long, default_value_t = 999)]
    pub n_perm: usize,
    /// Replicas per setting entering the energy test (0 = all).
    #[arg(long, default_value_t = 200)]
    pub energy_replicas: usize,
    /// JSON file with a list of temporal properties to check.
    #[arg(long)]
    pub properties: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for error_report.csv, summary.json, energy.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Built-in model name or model file path.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub grid_dt: Option<f64>,
    #[arg(long)]
    pub grid_h: Option<usize>,
    /// Trained weights file for the abstract method.
    #[arg(long)]
    pub weights: PathBuf,
    /// Batch sizes to measure.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 200, 2000])]
    pub batches: Vec<usize>,
    /// Leap length for the tau method (default: the grid step).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Initial setting as inline JSON (default: midpoint of the declared
    /// initial ranges).
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Timing CSV path (stdout JSON always carries the table).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
