use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hazbands::hazard::{CensoringModel, TruthHazard};
use hazbands::priors::PriorSpec;

/// Bayesian survival analysis with histogram priors and simultaneous credible bands.
///
/// Every subcommand accepts `--config FILE`, a flat `key = value` file whose
/// keys are long flag names; flags given on the command line take precedence.
/// Set HAZBANDS_THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "hazbands", version, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Fit the histogram-prior posterior to a CSV of right-censored times.
    Fit(FitArgs),
    /// Run a coverage study on simulated data.
    Simulate(SimulateArgs),
    /// Classical estimators and confidence bands.
    Frequentist(FrequentistArgs),
    /// Haar coefficients of the posterior mean hazard on a dyadic grid.
    Haar(HaarArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    pub input: PathBuf,
    /// Column holding follow-up times.
    #[arg(long, default_value = "time")]
    pub time_col: String,
    /// Column holding the event indicator (1 = event, 0 = censored).
    #[arg(long, default_value = "status")]
    pub status_col: String,
    /// Study horizon; later times are censored at it [default: largest observed time].
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorFamily {
    DepGamma,
    IndepGamma,
    DepLognormal,
    IndepLognormal,
    DepLoglaplace,
    IndepLoglaplace,
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    /// Prior on the histogram heights.
    #[arg(long, value_enum, default_value = "dep-gamma")]
    pub prior: PriorFamily,
    /// dep-gamma: shape of the first height.
    #[arg(long, default_value_t = 1.5)]
    pub alpha0: f64,
    /// dep-gamma: rate of the first height.
    #[arg(long, default_value_t = 1.0)]
    pub beta0: f64,
    /// dep-gamma: shape of each conditional step [default: 1]; indep-gamma: shape [default: 1.5].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// indep-gamma: rate.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Log-normal and log-Laplace: location of ln(first height).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu0: f64,
    /// Log-normal: scale of ln(first height).
    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,
    /// Log-Laplace: rate of ln(first height); must exceed 2.
    #[arg(long, default_value_t = 3.0)]
    pub theta0: f64,
    /// Dependent log-normal and log-Laplace: conditional SD relative to the previous height.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
}

impl PriorArgs {
    pub fn spec(&self) -> PriorSpec {
        match self.prior {
            PriorFamily::DepGamma => {
                PriorSpec::DepGamma { shape0: self.alpha0, rate0: self.beta0, alpha: self.alpha.unwrap_or(1.0) }
            }
            PriorFamily::IndepGamma => PriorSpec::IndepGamma { shape: self.alpha.unwrap_or(1.5), rate: self.beta },
            PriorFamily::DepLognormal => {
                PriorSpec::DepLogNormal { mu0: self.mu0, sigma0: self.sigma0, sigma: self.sigma }
            }
            PriorFamily::IndepLognormal => PriorSpec::IndepLogNormal { mu0: self.mu0, sigma0: self.sigma0 },
            PriorFamily::DepLoglaplace => {
                PriorSpec::DepLogLaplace { mu0: self.mu0, theta0: self.theta0, sigma: self.sigma }
            }
            PriorFamily::IndepLoglaplace => PriorSpec::IndepLogLaplace { mu0: self.mu0, theta0: self.theta0 },
        }
    }
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    /// Random-walk step on ln(height) for log-normal and log-Laplace priors.
    #[arg(long, default_value_t = 0.3)]
    pub rw_step: f64,
    /// Shape offset of the dependent-Gamma proposals.
    #[arg(long, default_value_t = 0.01)]
    pub proposal_epsilon: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Smoothness used by the interval-count rule K = ceil((n / ln n)^(1 / (1 + 2 gamma))).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Number of intervals; overrides --gamma [default: from the rule].
    #[arg(long)]
    pub k: Option<usize>,
    /// Total MCMC iterations, burn-in included.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Iterations discarded as burn-in.
    #[arg(long, default_value_t = 1_000)]
    pub burnin: usize,
    /// Seed of the random number generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Credible level of the bands.
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    pub level: f64,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Also write every kept draw to draws.csv.
    #[arg(long)]
    pub save_draws: bool,
    /// Output directory.
    #[arg(long, default_value = "hazbands-out")]
    pub out: PathBuf,
    /// key = value file supplying values for flags not given on the command line [default: none].
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TruthKind {
    Smooth,
    PiecewiseLinear,
}

impl TruthKind {
    pub fn hazard(self) -> TruthHazard {
        match self {
            TruthKind::Smooth => TruthHazard::Smooth,
            TruthKind::PiecewiseLinear => TruthHazard::PiecewiseLinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CensKind {
    /// Administrative censoring at the horizon only.
    Adm,
    /// Uniform censoring on the study window plus administrative censoring.
    AdmUnif,
}

impl CensKind {
    pub fn model(self) -> CensoringModel {
        match self {
            CensKind::Adm => CensoringModel::AdminOnly,
            CensKind::AdmUnif => CensoringModel::AdminPlusUniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// True hazard generating the data.
    #[arg(long, value_enum, default_value = "smooth")]
    pub truth: TruthKind,
    /// Censoring scenario.
    #[arg(long, value_enum, default_value = "adm-unif")]
    pub cens: CensKind,
    /// Sample size per replicate.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Smoothness used by the interval-count rule.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub gamma: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Number of simulated datasets.
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    /// Total MCMC iterations per replicate, burn-in included.
    #[arg(long, default_value_t = 5_000)]
    pub draws: usize,
    /// Iterations discarded as burn-in.
    #[arg(long, default_value_t = 500)]
    pub burnin: usize,
    /// Master seed; each replicate derives its own streams from it.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Credible and confidence level of every band.
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    pub level: f64,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Run the full grid of 32 scenarios (both truths, both censoring schemes, n in {200, 2000},
    /// gamma in {1/2, 1}, dependent and independent Gamma priors) with 1000 replicates each,
    /// ignoring the scenario flags above.
    #[arg(long)]
    pub paper_scale: bool,
    /// Output directory.
    #[arg(long, default_value = "hazbands-out")]
    pub out: PathBuf,
    /// key = value file supplying values for flags not given on the command line [default: none].
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FreqMethod {
    All,
    NelsonAalen,
    KaplanMeier,
    HallWellner,
    LogEp,
    Pointwise,
}

#[derive(Debug, Args)]
pub struct FrequentistArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Estimator or band to compute.
    #[arg(long, value_enum, default_value = "all")]
    pub method: FreqMethod,
    /// Confidence level of the bands.
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    pub level: f64,
    /// Output directory.
    #[arg(long, default_value = "hazbands-out")]
    pub out: PathBuf,
    /// key = value file supplying values for flags not given on the command line [default: none].
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HaarArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Smoothness used by the interval-count rule; K is rounded up to a power of two.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Number of intervals, rounded up to a power of two; overrides --gamma [default: from the rule].
    #[arg(long)]
    pub k: Option<usize>,
    /// Total MCMC iterations, burn-in included.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Iterations discarded as burn-in.
    #[arg(long, default_value_t = 1_000)]
    pub burnin: usize,
    /// Seed of the random number generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Level of the multiscale credible radius.
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    pub level: f64,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Output directory.
    #[arg(long, default_value = "hazbands-out")]
    pub out: PathBuf,
    /// key = value file supplying values for flags not given on the command line [default: none].
    #[arg(long)]
    pub config: Option<PathBuf>,
}
