//! Argument surface of the `landscape` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "landscape",
    version,
    about = "Landscape-law experiments for tight-binding Hamiltonians on periodic lattices"
)]
pub struct Cli {
    /// Worker threads for ensemble runs (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory for relative output paths.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,

    /// Suppress informational output (tables and failures still print).
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Solve the landscape equation Hu = 1 and write the field.
    Solve(SolveArgs),
    /// Integrated density of states N(mu) as CSV.
    Ids(IdsArgs),
    /// Landscape box-counting curve N_u(mu) from a landscape file.
    Boxcount(BoxcountArgs),
    /// Check N(mu) <= N_u(4d mu) and fit the practical law.
    Compare(CompareArgs),
    /// Dual curves and the exact counting identity (K even).
    Dual(DualArgs),
    /// Monte Carlo ensemble means from a JSON config.
    Ensemble(EnsembleArgs),
    /// Run the elliptic-oracle suite.
    Verify(VerifyArgs),
    /// Canned reproduction: d=1, K=300, uniform[0,10].
    Figure4(Figure4Args),
}

/// A potential, either from a file or generated on the fly.
#[derive(Args)]
pub struct PotentialInput {
    /// Potential file (flat text: `d K` header, then K^d values).
    #[arg(long, conflicts_with_all = ["d", "k", "dist", "seed", "realization"])]
    pub potential: Option<PathBuf>,

    /// Dimension of the torus (generator mode).
    #[arg(long)]
    pub d: Option<usize>,

    /// Side length K (generator mode).
    #[arg(long)]
    pub k: Option<usize>,

    /// Distribution: uniform:lo,hi | bernoulli:p,h | discrete:v:p,v:p,...
    #[arg(long)]
    pub dist: Option<String>,

    /// Master seed for the generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Realization index within the seed stream.
    #[arg(long, default_value_t = 0)]
    pub realization: u64,
}

#[derive(Args)]
pub struct GridArgs {
    /// Number of log-spaced grid points.
    #[arg(long, default_value_t = 200)]
    pub points: usize,

    /// Lower grid edge (default 1e-3 (4d + Vmax), clipped to 1/K^2).
    #[arg(long)]
    pub mu_min: Option<f64>,

    /// Upper grid edge (default 4d + Vmax).
    #[arg(long)]
    pub mu_max: Option<f64>,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: PotentialInput,

    /// Accept a constant potential (degenerate; the comparison bounds assume non-constant V).
    #[arg(long)]
    pub allow_constant: bool,

    #[arg(long, default_value = "landscape.txt")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct IdsArgs {
    #[command(flatten)]
    pub input: PotentialInput,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Dense-eigendecomposition cutoff; larger systems use inertia counting.
    #[arg(long, default_value_t = 4096)]
    pub dense_limit: usize,

    #[arg(long, default_value = "ids.csv")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct BoxcountArgs {
    /// Landscape file (flat text, same format as potentials).
    #[arg(long)]
    pub landscape: PathBuf,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Partition shift, comma-separated components in [0, s-1].
    #[arg(long)]
    pub shift: Option<String>,

    #[arg(long, default_value = "nu.csv")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CompareArgs {
    /// N curve CSV (from `ids`).
    #[arg(long)]
    pub ids: PathBuf,

    /// Landscape field file (from `solve`).
    #[arg(long)]
    pub landscape: PathBuf,

    #[arg(long, default_value = "law_report.csv")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct DualArgs {
    #[command(flatten)]
    pub input: PotentialInput,

    #[command(flatten)]
    pub grid: GridArgs,

    #[arg(long, default_value = "dual.csv")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EnsembleArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,

    /// Override the config's realization count.
    #[arg(long)]
    pub realizations: Option<usize>,

    /// Override the config's master seed.
    #[arg(long)]
    pub master_seed: Option<u64>,

    /// Also compute dual-landscape box counts (K even).
    #[arg(long)]
    pub dual: bool,

    /// Output prefix; writes <prefix>.csv and <prefix>.meta.json.
    #[arg(long, default_value = "ensemble")]
    pub out_prefix: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Randomized trials per oracle family.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,

    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct Figure4Args {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    #[arg(long, default_value = "figure4.csv")]
    pub out: PathBuf,

    /// Write a ready-to-render gnuplot script alongside the CSV.
    #[arg(long)]
    pub plot_script: Option<PathBuf>,
}
