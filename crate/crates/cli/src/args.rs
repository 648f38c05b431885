use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mpclust", version, about = "Minipatch consensus clustering")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "MPCLUST_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a data matrix.
    Cluster(ClusterArgs),
    /// Write a synthetic benchmark dataset.
    Simulate(SimulateArgs),
    /// Compare methods over an SNR grid on synthetic data.
    Benchmark(BenchmarkArgs),
    /// Pick the cheapest minipatch size whose consensus is stable.
    Tune(TuneArgs),
    /// Score labels against truth (ARI) and feature scores against a mask (F1).
    Eval(EvalArgs),
    /// Monte-Carlo check of the subsampled-distance deviation bound.
    HoeffdingCheck(HoeffdingArgs),
}

/// Input matrix layout.
#[derive(Debug, Args, Clone)]
pub struct InputArgs {
    /// Delimited matrix, observations in rows unless --transpose.
    pub input: PathBuf,
    /// The file stores features in rows and observations in columns.
    #[arg(long)]
    pub transpose: bool,
    /// Field delimiter (default: tab for .tsv/.tab, comma otherwise).
    #[arg(long)]
    pub delimiter: Option<char>,
    /// The first line is data, not column ids.
    #[arg(long)]
    pub no_header: bool,
    /// The first column is data, not row ids.
    #[arg(long)]
    pub no_row_ids: bool,
    /// Apply x -> log2(1 + x) after loading.
    #[arg(long)]
    pub log2: bool,
}

/// Hyper-parameters. Unset flags fall back to the environment
/// (`MPCLUST_*`), then the config file, then built-in defaults.
#[derive(Debug, Args, Clone, Default)]
pub struct HpArgs {
    /// Flat key=value config file, or a manifest.json from an earlier run.
    #[arg(long, env = "MPCLUST_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "MPCLUST_MODE", value_parser = ["mpcc", "mpacc", "impacc"])]
    pub mode: Option<String>,
    /// Final number of clusters, or "auto" to cut the consensus tree at h.
    #[arg(long, visible_alias = "k-final", env = "MPCLUST_K")]
    pub k: Option<String>,
    #[arg(long = "final", env = "MPCLUST_FINAL", value_parser = ["hierarchical", "spectral", "auto"])]
    pub final_algo: Option<String>,
    #[arg(long, env = "MPCLUST_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "MPCLUST_M_FRAC")]
    pub m_frac: Option<f64>,
    #[arg(long, env = "MPCLUST_N_FRAC")]
    pub n_frac: Option<f64>,
    #[arg(long, env = "MPCLUST_H")]
    pub h: Option<f64>,
    #[arg(long, env = "MPCLUST_ETA")]
    pub eta: Option<f64>,
    #[arg(long, env = "MPCLUST_ALPHA_F")]
    pub alpha_f: Option<f64>,
    #[arg(long, env = "MPCLUST_TAU")]
    pub tau: Option<f64>,
    #[arg(long, env = "MPCLUST_ALPHA_I")]
    pub alpha_i: Option<f64>,
    #[arg(long, env = "MPCLUST_THETA")]
    pub theta: Option<f64>,
    #[arg(long, visible_alias = "epochs-e", env = "MPCLUST_EPOCHS")]
    pub epochs: Option<usize>,
    #[arg(long, env = "MPCLUST_T_MAX")]
    pub t_max: Option<usize>,
    #[arg(long, env = "MPCLUST_METRIC", value_parser = ["manhattan", "sq_euclidean"])]
    pub metric: Option<String>,
    /// Confusion percentile watched by early stopping.
    #[arg(long, env = "MPCLUST_STOP_Q")]
    pub stop_q: Option<f64>,
    #[arg(long, env = "MPCLUST_STOP_TOL")]
    pub stop_tol: Option<f64>,
    #[arg(long, env = "MPCLUST_STOP_PATIENCE")]
    pub stop_patience: Option<usize>,
    /// Cluster uniform (mpcc) minipatches in parallel; results are unchanged.
    #[arg(long, env = "MPCLUST_PARALLEL")]
    pub parallel: Option<bool>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub hp: HpArgs,
    /// Output directory.
    #[arg(long, short, default_value = "mpclust-out")]
    pub out: PathBuf,
    #[arg(long, value_parser = ["csv", "binary"], default_value = "csv")]
    pub consensus_format: String,
    /// Also write per-iteration sampling weights (weights_trace.csv).
    #[arg(long)]
    pub weight_trace: bool,
}

/// Synthetic data shape shared by simulate and benchmark.
#[derive(Debug, Args, Clone)]
pub struct SynthArgs {
    #[arg(long, value_parser = ["sparse", "weak_sparse", "no_sparse"], default_value = "sparse")]
    pub regime: String,
    #[arg(long)]
    pub n_obs: Option<usize>,
    /// Default 5000, or 100 in the no_sparse regime.
    #[arg(long)]
    pub n_features: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub n_clusters: usize,
    /// Comma-separated cluster sizes (default: 4/16/24/56 % for four clusters).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub n_signal: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    #[arg(long, default_value_t = 5.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 0, env = "MPCLUST_SEED")]
    pub seed: u64,
    #[arg(long, short, default_value = "mpclust-sim")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Synthetic data; sizes default to 200 x 1000 with 10 signal features.
    #[command(flatten)]
    pub synth: SynthArgs,
    #[command(flatten)]
    pub hp: HpArgs,
    /// Comma-separated SNR values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub snrs: Vec<f64>,
    /// Explicit seed list; otherwise --reps seeds starting at --base-seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, default_value_t = 10)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub base_seed: u64,
    /// Methods: mpcc, mpacc, impacc, hierarchical, consensus.
    #[arg(long, value_delimiter = ',', default_value = "mpcc,impacc,hierarchical")]
    pub methods: Vec<String>,
    /// Select the top-k features for F1 instead of the mean + sd rule.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Resampling rounds of the consensus baseline.
    #[arg(long, default_value_t = 100)]
    pub consensus_iterations: usize,
    /// Leave the seconds column empty so reruns compare byte for byte.
    #[arg(long)]
    pub no_timings: bool,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub hp: HpArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    pub grid_m: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
    pub grid_n: Vec<f64>,
    /// Report CSV (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// True labels CSV (label in the last column).
    #[arg(long, requires = "pred")]
    pub truth: Option<PathBuf>,
    /// Predicted labels CSV.
    #[arg(long, requires = "truth")]
    pub pred: Option<PathBuf>,
    /// Feature scores CSV (score in the last column).
    #[arg(long, requires = "mask")]
    pub scores: Option<PathBuf>,
    /// True signal mask CSV (0/1 or true/false in the last column).
    #[arg(long, requires = "scores")]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Accepted for uniformity with other subcommands; evaluation draws no randomness.
    #[arg(long, env = "MPCLUST_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HoeffdingArgs {
    /// Matrix to test (default: Gaussian noise with --n-obs x --n-features).
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub n_obs: usize,
    #[arg(long, default_value_t = 100)]
    pub n_features: usize,
    #[arg(long = "m", value_delimiter = ',', default_value = "5,10,20")]
    pub m_feat: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_parser = ["manhattan", "sq_euclidean"], default_value = "manhattan")]
    pub metric: String,
    #[arg(long, default_value_t = 0, env = "MPCLUST_SEED")]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
