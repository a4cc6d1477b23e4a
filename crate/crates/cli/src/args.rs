use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigLayer;

#[derive(Debug, Parser)]
#[command(name = "ranksubset", version, about = "Rank-based best subset selection for sparse single index models")]
pub struct Cli {
    /// Increase log verbosity on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a sparse support on a CSV dataset.
    Fit(FitArgs),
    /// Run a replicated support-recovery study on simulated data.
    Simulate(SimulateArgs),
    /// Time the methods while sweeping n or p.
    Benchmark(BenchmarkArgs),
}

/// Knobs of the splicing search.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Largest support size tried (default: the √(n / (ln p · lnln n)) rule).
    #[arg(long)]
    pub smax: Option<usize>,
    /// Largest number of columns exchanged in one splice (default: min(s, 5)).
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Loss-decrease threshold for accepting a splice (default scales with s ln p lnln n / n).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Divide every column by its standard deviation before fitting.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    pub input: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    pub response: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the selected coefficients to this CSV file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Simulation grid flags shared by `simulate` and `benchmark`.
#[derive(Debug, Args)]
pub struct GridArgs {
    /// TOML file with run settings; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample sizes (comma separated or repeated).
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Dimensions (comma separated or repeated).
    #[arg(long = "p", value_delimiter = ',')]
    pub p: Vec<usize>,
    /// Number of nonzero coefficients.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Value of every nonzero coefficient.
    #[arg(long)]
    pub signal: Option<f64>,
    /// Covariance structures: independent, exponential[:rho], equicorrelated[:rho].
    #[arg(long = "cov")]
    pub covariance: Vec<String>,
    /// Link functions: linear, exponential.
    #[arg(long)]
    pub link: Vec<String>,
    /// Error laws: gaussian, cauchy.
    #[arg(long)]
    pub error: Vec<String>,
    /// Methods to run (repeatable): rankabess, ranklasso, ranklasso-cv, t-ranklasso, a-ranklasso.
    #[arg(long = "method")]
    pub methods: Vec<String>,
    /// Replications per design point.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Constant c of the fixed lasso penalty c·√(ln p / n).
    #[arg(long)]
    pub lasso_c: Option<f64>,
    /// Folds of the cross-validated lasso.
    #[arg(long)]
    pub cv_folds: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Worker threads for replications.
    #[arg(long, env = "RANKSUBSET_THREADS")]
    pub threads: Option<usize>,
    /// Write NA in the timing columns so output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Which dimension is swept: n or p.
    #[arg(long)]
    pub sweep: Option<String>,
}

fn non_empty(v: &[String]) -> Option<Vec<String>> {
    (!v.is_empty()).then(|| v.to_vec())
}

impl GridArgs {
    pub fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            seed: self.seed,
            reps: self.reps,
            methods: non_empty(&self.methods),
            out: self.out.clone(),
            n: (!self.n.is_empty()).then(|| self.n.clone()),
            p: (!self.p.is_empty()).then(|| self.p.clone()),
            sparsity: self.sparsity,
            signal: self.signal,
            covariance: non_empty(&self.covariance),
            link: non_empty(&self.link),
            error: non_empty(&self.error),
            s_max: self.solver.smax,
            k_max: self.solver.kmax,
            tau: self.solver.tau,
            standardize: self.solver.standardize.then_some(true),
            lasso_c: self.lasso_c,
            cv_folds: self.cv_folds,
            ..ConfigLayer::default()
        }
    }
}
