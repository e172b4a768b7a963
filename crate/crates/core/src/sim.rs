//! Synthetic right-censored data and the coverage study.
//!
//! Each replicate owns two random streams derived from the master seed and
//! its index (one for data, one for the chain), so a study is a pure function
//! of its [`Scenario`] and replicates can run in any order or in parallel.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{
    band_area, band_covers, credible_band, curve_of, evaluation_grid, median_draws, Band, BandMethod, Target,
};
use crate::data::{augment, select_interval_count, IntervalGrid, Observation, SurvivalDataset};
use crate::error::{Error, Result};
use crate::frequentist::{
    hall_wellner_band_with, kaplan_meier, log_ep_band_with, nelson_aalen, pointwise_intervals, CriticalTables,
};
use crate::hazard::{median_survival, CensoringModel, Hazard, TruthHazard};
use crate::priors::PriorSpec;
use crate::rng::{derive_seed, stream};
use crate::sampler::{run_chain, ChainConfig};

/// `Lambda^{-1}(E)` for `E ~ Exp(1)`; may exceed 1.
pub fn sample_event_time<H: Hazard + ?Sized, R: Rng + ?Sized>(truth: &H, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    truth.inverse_cumulative(e)
}

/// Observed `(Y, event)` for event time `t`.
pub fn apply_censoring<R: Rng + ?Sized>(model: CensoringModel, t: f64, rng: &mut R) -> (f64, bool) {
    let c = match model {
        CensoringModel::AdminOnly => 1.0,
        // 1 - U lies in (0, 1].
        CensoringModel::AdminPlusUniform => 1.0 - rng.random::<f64>(),
    };
    let c = c.min(1.0);
    if t <= c {
        (t, true)
    } else {
        (c, false)
    }
}

pub fn generate_dataset<H: Hazard + ?Sized, R: Rng + ?Sized>(
    truth: &H,
    cens: CensoringModel,
    n: usize,
    rng: &mut R,
) -> Result<SurvivalDataset> {
    let records = (0..n)
        .map(|_| {
            let t = sample_event_time(truth, rng);
            let (time, event) = apply_censoring(cens, t, rng);
            Observation { time, event }
        })
        .collect();
    SurvivalDataset::new(records)
}

/// Fraction of censored observations over `draws` simulated subjects.
pub fn censoring_fraction<H: Hazard + ?Sized>(truth: &H, cens: CensoringModel, draws: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, 0, 0);
    let censored = (0..draws)
        .filter(|_| {
            let t = sample_event_time(truth, &mut rng);
            !apply_censoring(cens, t, &mut rng).1
        })
        .count();
    censored as f64 / draws as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub truth: TruthHazard,
    pub censoring: CensoringModel,
    pub n: usize,
    pub gamma: f64,
    pub prior: PriorSpec,
    pub level: f64,
    pub replicates: usize,
    pub chain: ChainConfig,
    pub seed: u64,
}

impl Scenario {
    /// Desk-scale defaults: 200 replicates, 5 000 draws with 500 burn-in.
    pub fn desk(truth: TruthHazard, censoring: CensoringModel, n: usize, gamma: f64, prior: PriorSpec) -> Self {
        Self {
            truth,
            censoring,
            n,
            gamma,
            prior,
            level: 0.95,
            replicates: 200,
            chain: ChainConfig { n_draws: 5_000, burn_in: 500, ..ChainConfig::default() },
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidParameter(format!("scenario needs n >= 10, got {}", self.n)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("scenario needs at least one replicate".into()));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if !matches!(self.truth, TruthHazard::Smooth | TruthHazard::PiecewiseLinear) {
            return Err(Error::InvalidParameter("study truths are the smooth and piecewise-linear hazards".into()));
        }
        self.prior.validate()?;
        self.chain.validate()
    }

    pub fn label(&self) -> String {
        let truth = match self.truth {
            TruthHazard::Smooth => "smooth",
            TruthHazard::PiecewiseLinear => "piecewise-linear",
            TruthHazard::Histogram(_) => "histogram",
            TruthHazard::Constant(_) => "constant",
        };
        let cens = match self.censoring {
            CensoringModel::AdminOnly => "adm",
            CensoringModel::AdminPlusUniform => "adm-unif",
        };
        format!("{truth}/{cens}/n={}/gamma={}/{}", self.n, self.gamma, self.prior.name())
    }
}

/// The eight truth x censoring x n settings, each with the four prior x gamma columns.
pub fn full_scenarios(replicates: usize, seed: u64) -> Vec<Scenario> {
    let mut out = Vec::new();
    for truth in [TruthHazard::Smooth, TruthHazard::PiecewiseLinear] {
        for cens in [CensoringModel::AdminPlusUniform, CensoringModel::AdminOnly] {
            for n in [200, 2000] {
                for gamma in [0.5, 1.0] {
                    for prior in [PriorSpec::default_dep_gamma(), PriorSpec::default_indep_gamma()] {
                        let mut s = Scenario::desk(truth.clone(), cens, n, gamma, prior);
                        s.replicates = replicates;
                        s.seed = seed;
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// Every band built for one replicate, with the truth curves on the same grid.
#[derive(Debug, Clone)]
pub struct ReplicateBands {
    pub truth: TruthHazard,
    pub k: usize,
    pub grid: Vec<f64>,
    pub truth_survival: Vec<f64>,
    pub truth_cumhaz: Vec<f64>,
    pub bands: Vec<Band>,
    pub true_median: Option<f64>,
    pub median_interval: Option<(f64, f64)>,
    pub median_variance: Option<f64>,
    pub median_beyond_horizon: usize,
    pub acceptance_rates: Vec<f64>,
}

pub fn replicate_bands(scenario: &Scenario, replicate: usize, tables: &CriticalTables) -> Result<ReplicateBands> {
    let wrap = |e: Error| Error::Replicate { replicate, source: Box::new(e) };
    let mut rng = stream(scenario.seed, replicate as u64, 0);
    let data = generate_dataset(&scenario.truth, scenario.censoring, scenario.n, &mut rng).map_err(wrap)?;
    let k = select_interval_count(scenario.n, scenario.gamma).map_err(wrap)?;
    let igrid = IntervalGrid::new(k).map_err(wrap)?;
    let summary = augment(&data, &igrid);
    let cfg = ChainConfig { seed: derive_seed(scenario.seed, replicate as u64, 1), ..scenario.chain };
    let chain = run_chain(&scenario.prior, &summary, &cfg).map_err(wrap)?;

    let grid = evaluation_grid(&igrid);
    let level = scenario.level;
    let mut bands = vec![
        credible_band(&chain, Target::Survival, &grid, level).map_err(wrap)?,
        credible_band(&chain, Target::CumHaz, &grid, level).map_err(wrap)?,
    ];
    match hall_wellner_band_with(&data, &grid, tables) {
        Ok(b) => bands.push(b),
        Err(Error::NoEvents) => {}
        Err(e) => return Err(wrap(e)),
    }
    match log_ep_band_with(&data, &grid, tables) {
        Ok(b) => bands.push(b),
        Err(Error::NoEvents) => {}
        Err(e) => return Err(wrap(e)),
    }
    for estimate in [kaplan_meier(&data), nelson_aalen(&data)] {
        match pointwise_intervals(&estimate, level, &grid) {
            Ok(b) => bands.push(b),
            Err(Error::NoEvents) => {}
            Err(e) => return Err(wrap(e)),
        }
    }

    let medians = median_draws(&chain);
    let tail = (1.0 - level) / 2.0;
    let median_interval = match (medians.quantile(tail), medians.quantile(1.0 - tail)) {
        (Some(a), Some(b)) if medians.beyond_horizon == 0 => Some((a, b)),
        _ => None,
    };
    Ok(ReplicateBands {
        truth: scenario.truth.clone(),
        k,
        truth_survival: curve_of(&scenario.truth, Target::Survival, &grid),
        truth_cumhaz: curve_of(&scenario.truth, Target::CumHaz, &grid),
        grid,
        bands,
        true_median: median_survival(&scenario.truth).time(),
        median_interval,
        median_variance: medians.variance(),
        median_beyond_horizon: medians.beyond_horizon,
        acceptance_rates: chain.acceptance_rates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandOutcome {
    pub target: Target,
    pub method: BandMethod,
    pub covered: bool,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub k: usize,
    pub bands: Vec<BandOutcome>,
    pub median_covered: Option<bool>,
    pub median_variance: Option<f64>,
    pub median_beyond_horizon: usize,
}

impl ReplicateBands {
    /// Truth curve for `band` on the band's own grid (`None` for hazard bands).
    pub fn truth_for(&self, band: &Band) -> Option<Vec<f64>> {
        match band.target {
            Target::Survival if band.grid == self.grid => Some(self.truth_survival.clone()),
            Target::CumHaz if band.grid == self.grid => Some(self.truth_cumhaz.clone()),
            Target::Survival | Target::CumHaz => Some(curve_of(&self.truth, band.target, &band.grid)),
            Target::Hazard => None,
        }
    }

    pub fn outcome(&self, replicate: usize) -> Result<ReplicateOutcome> {
        let bands = self
            .bands
            .iter()
            .filter_map(|b| self.truth_for(b).map(|truth| (b, truth)))
            .map(|(b, truth)| {
                Ok(BandOutcome {
                    target: b.target,
                    method: b.method,
                    covered: band_covers(b, &truth)?,
                    area: band_area(b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let median_covered = match (self.true_median, self.median_interval) {
            (Some(m), Some((lo, hi))) => Some(lo <= m && m <= hi),
            _ => None,
        };
        Ok(ReplicateOutcome {
            replicate,
            k: self.k,
            bands,
            median_covered,
            median_variance: self.median_variance,
            median_beyond_horizon: self.median_beyond_horizon,
        })
    }
}

pub fn run_replicate(scenario: &Scenario, replicate: usize, tables: &CriticalTables) -> Result<ReplicateOutcome> {
    replicate_bands(scenario, replicate, tables)?.outcome(replicate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub target: Target,
    pub method: BandMethod,
    pub replicates: usize,
    pub covered: usize,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_area: f64,
    pub area_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianSummary {
    /// Share of replicates whose equal-tailed credible interval for the median contains the truth.
    pub interval_coverage: Option<f64>,
    pub mean_posterior_variance: Option<f64>,
    pub beyond_horizon_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: Scenario,
    pub label: String,
    pub k: usize,
    pub methods: Vec<MethodSummary>,
    pub median: MedianSummary,
}

impl CoverageReport {
    pub fn get(&self, target: Target, method: BandMethod) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.target == target && m.method == method)
    }

    pub fn aggregate(scenario: &Scenario, outcomes: &[ReplicateOutcome]) -> Self {
        let mut keys: Vec<(Target, BandMethod)> = Vec::new();
        for o in outcomes {
            for b in &o.bands {
                if !keys.contains(&(b.target, b.method)) {
                    keys.push((b.target, b.method));
                }
            }
        }
        let methods = keys
            .into_iter()
            .map(|(target, method)| {
                let rows: Vec<&BandOutcome> = outcomes
                    .iter()
                    .flat_map(|o| o.bands.iter())
                    .filter(|b| b.target == target && b.method == method)
                    .collect();
                let n = rows.len();
                let covered = rows.iter().filter(|b| b.covered).count();
                let coverage = covered as f64 / n as f64;
                let areas: Vec<f64> = rows.iter().map(|b| b.area).collect();
                let mean_area = areas.iter().sum::<f64>() / n as f64;
                let area_se = if n > 1 {
                    (areas.iter().map(|a| (a - mean_area).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
                } else {
                    0.0
                };
                MethodSummary {
                    target,
                    method,
                    replicates: n,
                    covered,
                    coverage,
                    coverage_se: (coverage * (1.0 - coverage) / n as f64).sqrt(),
                    mean_area,
                    area_se,
                }
            })
            .collect();
        let mc: Vec<bool> = outcomes.iter().filter_map(|o| o.median_covered).collect();
        let mv: Vec<f64> = outcomes.iter().filter_map(|o| o.median_variance).collect();
        let median = MedianSummary {
            interval_coverage: (!mc.is_empty()).then(|| mc.iter().filter(|c| **c).count() as f64 / mc.len() as f64),
            mean_posterior_variance: (!mv.is_empty()).then(|| mv.iter().sum::<f64>() / mv.len() as f64),
            beyond_horizon_draws: outcomes.iter().map(|o| o.median_beyond_horizon).sum(),
        };
        Self {
            scenario: scenario.clone(),
            label: scenario.label(),
            k: outcomes.first().map_or(0, |o| o.k),
            methods,
            median,
        }
    }

    /// Column names of [`CoverageReport::table_row`].
    pub const TABLE_HEADER: &'static str = "scenario,truth,censoring,n,gamma,prior,k,replicates,\
credible_survival_coverage,credible_survival_area,credible_cumhaz_coverage,\
hall_wellner_coverage,hall_wellner_area,log_ep_coverage,log_ep_area,\
pointwise_survival_coverage,pointwise_cumhaz_coverage";

    /// One CSV row in the layout of [`CoverageReport::TABLE_HEADER`].
    pub fn table_row(&self) -> String {
        let cov = |t, m| self.get(t, m).map_or(String::from("NA"), |s| format!("{:.4}", s.coverage));
        let area = |t, m| self.get(t, m).map_or(String::from("NA"), |s| format!("{:.4}", s.mean_area));
        let s = &self.scenario;
        let truth = match s.truth {
            TruthHazard::Smooth => "smooth",
            TruthHazard::PiecewiseLinear => "piecewise_linear",
            _ => "other",
        };
        let cens = match s.censoring {
            CensoringModel::AdminOnly => "adm",
            CensoringModel::AdminPlusUniform => "adm_unif",
        };
        [
            format!("\"{}\"", self.label),
            truth.to_string(),
            cens.to_string(),
            s.n.to_string(),
            s.gamma.to_string(),
            s.prior.name().to_string(),
            self.k.to_string(),
            s.replicates.to_string(),
            cov(Target::Survival, BandMethod::Credible),
            area(Target::Survival, BandMethod::Credible),
            cov(Target::CumHaz, BandMethod::Credible),
            cov(Target::Survival, BandMethod::HallWellner),
            area(Target::Survival, BandMethod::HallWellner),
            cov(Target::Survival, BandMethod::LogEp),
            area(Target::Survival, BandMethod::LogEp),
            cov(Target::Survival, BandMethod::Pointwise),
            cov(Target::CumHaz, BandMethod::Pointwise),
        ]
        .join(",")
    }
}

/// Runs every replicate (in parallel on the current rayon pool) and aggregates.
pub fn run_replication_study(scenario: &Scenario) -> Result<CoverageReport> {
    let tables = CriticalTables::cached(scenario.level)?;
    run_replication_study_with(scenario, &tables)
}

pub fn run_replication_study_with(scenario: &Scenario, tables: &CriticalTables) -> Result<CoverageReport> {
    scenario.validate()?;
    let outcomes = (0..scenario.replicates)
        .into_par_iter()
        .map(|r| run_replicate(scenario, r, tables))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageReport::aggregate(scenario, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admin_only_keeps_events_before_one() {
        let mut rng = stream(1, 0, 0);
        assert_eq!(apply_censoring(CensoringModel::AdminOnly, 0.4, &mut rng), (0.4, true));
        assert_eq!(apply_censoring(CensoringModel::AdminOnly, 1.7, &mut rng), (1.0, false));
    }

    #[test]
    fn uniform_censoring_never_exceeds_event() {
        let mut rng = stream(2, 0, 0);
        for _ in 0..1000 {
            let (y, ev) = apply_censoring(CensoringModel::AdminPlusUniform, 0.5, &mut rng);
            assert!(y > 0.0 && y <= 0.5);
            assert_eq!(ev, y == 0.5);
        }
    }

    #[test]
    fn scenario_validation() {
        let mut s =
            Scenario::desk(TruthHazard::Smooth, CensoringModel::AdminOnly, 200, 0.5, PriorSpec::default_dep_gamma());
        assert!(s.validate().is_ok());
        s.n = 5;
        assert!(s.validate().is_err());
        s.n = 200;
        s.gamma = 0.0;
        assert!(s.validate().is_err());
        s.gamma = 0.5;
        s.replicates = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn full_grid_has_thirty_two_cells() {
        let all = full_scenarios(1000, 3);
        assert_eq!(all.len(), 32);
        assert!(all.iter().all(|s| s.replicates == 1000));
    }
}
