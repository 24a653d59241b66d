//! `kgg`: evaluate, simulate and fit κ-generalized gamma wealth distributions.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "kgg", version, about = "κ-generalized gamma wealth distribution toolkit")]
struct Cli {
    /// Worker threads for simulations and fits (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the density, the complementary cdf or the Lorenz curve
    Dist(DistArgs),
    /// Run an ensemble of kinetic exchange simulations
    Simulate(SimulateArgs),
    /// Fit a κGG density to a histogram CSV or a one-column sample file
    Fit(FitArgs),
    /// Gini, Theil, MLD and generalized entropies of a parameter set
    Inequality(InequalityArgs),
    /// Write the data behind one of the standard figures
    ReproduceFig(ReproduceArgs),
}

#[derive(Args, Clone, Copy)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
}

impl ParamArgs {
    pub fn params(&self) -> CliResult<kgg::KggParams> {
        Ok(kgg::KggParams::new(self.alpha, self.nu, self.beta, self.kappa)?)
    }
}

/// `lo:hi:n`, `n` log-spaced points from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LogGrid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi / self.lo).ln() / (self.n - 1) as f64;
        (0..self.n).map(|i| self.lo * (step * i as f64).exp()).collect()
    }
}

impl FromStr for LogGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got `{s}`"));
        };
        let lo: f64 = lo.parse().map_err(|e| format!("lo: {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("hi: {e}"))?;
        let n: usize = n.parse().map_err(|e| format!("n: {e}"))?;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
            return Err(format!("need 0 < lo < hi and n ≥ 2, got `{s}`"));
        }
        Ok(LogGrid { lo, hi, n })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    /// columns x,pdf
    Eval,
    /// columns x,ccdf
    Ccdf,
    /// columns u,L
    Lorenz,
}

#[derive(Args)]
struct DistArgs {
    kind: DistKind,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "1e-2:1e3:200")]
    log_grid: LogGrid,
    /// Lorenz curve intervals; writes points + 1 rows
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Output file (stdout if omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Homogeneous saving propensity (uniform λ if neither this nor a config is given)
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    mean_money: Option<f64>,
    #[arg(long)]
    exchanges: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, env = "KGG_OUTPUT_DIR", default_value = "kgg-output")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Hist,
    Mle,
}

#[derive(Args)]
struct FitArgs {
    /// Histogram CSV (bin_center,density,count) or one sample per line
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Hist)]
    method: MethodArg,
    /// Ignore bins centered below this wealth
    #[arg(long)]
    mask_xmin: Option<f64>,
    /// Ignore bins centered above this wealth (e.g. a finite-size cutoff)
    #[arg(long)]
    mask_xmax: Option<f64>,
    #[arg(long, default_value_t = kgg::fitting::DEFAULT_MIN_COUNT)]
    min_count: u64,
    /// Log bins used when histogram-fitting raw samples
    #[arg(long, default_value_t = 60)]
    bins: usize,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the JSON report instead of the text summary
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InequalityArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Generalized entropy orders, comma separated (use `--theta=-1,2` for a
    /// leading negative); 0 and 1 give MLD and Theil
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta: Vec<f64>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
    figure: u8,
    #[arg(long, env = "KGG_OUTPUT_DIR", default_value = "kgg-output")]
    out_dir: PathBuf,
    #[arg(long, default_value = "1e-2:1e3:200")]
    log_grid: LogGrid,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Realizations of the simulation behind figure 6
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Dist(a) => commands::dist(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Inequality(a) => commands::inequality(a),
        Command::ReproduceFig(a) => commands::reproduce_fig(a),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kgg: {e}");
            e.exit_code()
        }
    }
}
